//! JSON output with fixed-precision floats.
//!
//! Model documents print every number with 17 significant digits so that a
//! reload reproduces each `f64` bit-for-bit; reports print 6 decimal places.

use std::io::{self, Write};

use serde::Serialize;
use serde_json::ser::{Formatter, PrettyFormatter};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FloatStyle {
    /// `{:.16e}`: 17 significant digits.
    Exact,
    /// `{:.6}`: 6 decimal places.
    Fixed6,
}

pub fn format_f64(value: f64, style: FloatStyle) -> String {
    match style {
        FloatStyle::Exact => format!("{value:.16e}"),
        FloatStyle::Fixed6 => {
            let s = format!("{value:.6}");
            // avoid "-0.000000"
            if s.starts_with('-') && s[1..].bytes().all(|b| b == b'0' || b == b'.') {
                s[1..].to_string()
            } else {
                s
            }
        }
    }
}

struct FloatFormatter<'a> {
    inner: PrettyFormatter<'a>,
    style: FloatStyle,
}

macro_rules! delegate {
    ($($name:ident($($arg:ident: $ty:ty),*);)*) => {
        $(
            fn $name<W: ?Sized + Write>(&mut self, w: &mut W $(, $arg: $ty)*) -> io::Result<()> {
                self.inner.$name(w $(, $arg)*)
            }
        )*
    };
}

impl Formatter for FloatFormatter<'_> {
    fn write_f64<W: ?Sized + Write>(&mut self, w: &mut W, value: f64) -> io::Result<()> {
        if !value.is_finite() {
            return Err(io::Error::new(
                io::ErrorKind::InvalidData,
                format!("non-finite number {value} cannot be written as JSON"),
            ));
        }
        w.write_all(format_f64(value, self.style).as_bytes())
    }

    // serde_json turns NaN and infinities into `null` before they reach
    // `write_f64`. None of the documents written here contain a real null.
    fn write_null<W: ?Sized + Write>(&mut self, _w: &mut W) -> io::Result<()> {
        Err(io::Error::new(
            io::ErrorKind::InvalidData,
            "null or non-finite number cannot be written",
        ))
    }

    fn write_f32<W: ?Sized + Write>(&mut self, w: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(w, f64::from(value))
    }

    delegate! {
        begin_array();
        end_array();
        begin_array_value(first: bool);
        end_array_value();
        begin_object();
        end_object();
        begin_object_key(first: bool);
        end_object_key();
        begin_object_value();
        end_object_value();
    }
}

pub fn to_writer<W: Write, T: Serialize + ?Sized>(
    writer: W,
    value: &T,
    style: FloatStyle,
) -> serde_json::Result<()> {
    let formatter = FloatFormatter {
        inner: PrettyFormatter::with_indent(b"  "),
        style,
    };
    let mut ser = serde_json::Serializer::with_formatter(writer, formatter);
    value.serialize(&mut ser)
}

pub fn to_string<T: Serialize + ?Sized>(value: &T, style: FloatStyle) -> serde_json::Result<String> {
    let mut buf = Vec::new();
    to_writer(&mut buf, value, style)?;
    buf.push(b'\n');
    Ok(String::from_utf8(buf).expect("serde_json emits UTF-8"))
}
