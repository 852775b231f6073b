use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use byteorder::{LittleEndian, ReadBytesExt, WriteBytesExt};
use nalgebra::Point3;

use crate::error::{Error, ParseLocation, Result};
use crate::geom::{PointCloud, TriangleMesh};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PlyEncoding {
    Ascii,
    BinaryLittleEndian,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum ScalarType {
    I8,
    U8,
    I16,
    U16,
    I32,
    U32,
    F32,
    F64,
}

impl ScalarType {
    fn parse(token: &str, property: &str) -> Option<Self> {
        Some(match token {
            "char" | "int8" => Self::I8,
            "uchar" | "uint8" => Self::U8,
            "short" | "int16" => Self::I16,
            "ushort" | "uint16" => Self::U16,
            "int" | "int32" => Self::I32,
            "uint" | "uint32" => Self::U32,
            "float" | "float32" => Self::F32,
            "double" | "float64" => Self::F64,
            _ => {
                let _ = property;
                return None;
            }
        })
    }

    fn read_binary(self, reader: &mut impl Read) -> std::io::Result<f64> {
        Ok(match self {
            Self::I8 => reader.read_i8()? as f64,
            Self::U8 => reader.read_u8()? as f64,
            Self::I16 => reader.read_i16::<LittleEndian>()? as f64,
            Self::U16 => reader.read_u16::<LittleEndian>()? as f64,
            Self::I32 => reader.read_i32::<LittleEndian>()? as f64,
            Self::U32 => reader.read_u32::<LittleEndian>()? as f64,
            Self::F32 => reader.read_f32::<LittleEndian>()? as f64,
            Self::F64 => reader.read_f64::<LittleEndian>()?,
        })
    }

    fn byte_len(self) -> u64 {
        match self {
            Self::I8 | Self::U8 => 1,
            Self::I16 | Self::U16 => 2,
            Self::I32 | Self::U32 | Self::F32 => 4,
            Self::F64 => 8,
        }
    }
}

#[derive(Debug, Clone)]
enum Property {
    Scalar { name: String, ty: ScalarType },
    List {
        name: String,
        count_ty: ScalarType,
        item_ty: ScalarType,
    },
}

impl Property {
    fn name(&self) -> &str {
        match self {
            Self::Scalar { name, .. } | Self::List { name, .. } => name,
        }
    }
}

#[derive(Debug)]
struct ElementDecl {
    name: String,
    count: usize,
    properties: Vec<Property>,
}

#[derive(Debug, Clone)]
enum Value {
    Scalar(f64),
    List(Vec<f64>),
}

struct Header {
    encoding: PlyEncoding,
    elements: Vec<ElementDecl>,
    /// Line count of the header (ASCII error reporting).
    header_lines: usize,
    /// Byte length of the header (binary error reporting).
    header_bytes: u64,
}

struct Parsed {
    header: Header,
    /// Row-major values per element, same order as the declarations.
    data: Vec<Vec<Vec<Value>>>,
}

fn parse_err(path: &Path, location: ParseLocation, message: impl Into<String>) -> Error {
    Error::Parse {
        path: path.to_path_buf(),
        location,
        message: message.into(),
    }
}

fn read_header_line(reader: &mut (impl BufRead + ?Sized), bytes: &mut u64) -> Result<Option<String>> {
    let mut buf = Vec::new();
    let n = reader.read_until(b'\n', &mut buf)?;
    if n == 0 {
        return Ok(None);
    }
    *bytes += n as u64;
    let line = String::from_utf8_lossy(&buf).trim_end().to_string();
    Ok(Some(line))
}

fn parse_header(reader: &mut impl BufRead, path: &Path) -> Result<Header> {
    let mut bytes = 0u64;
    let mut lines = 0usize;

    let line = |reader: &mut dyn BufRead, lines: &mut usize, bytes: &mut u64| -> Result<String> {
        *lines += 1;
        read_header_line(reader, bytes)?.ok_or_else(|| {
            parse_err(path, ParseLocation::Line(*lines), "unexpected end of header")
        })
    };

    let magic = line(reader, &mut lines, &mut bytes)?;
    if magic.trim() != "ply" {
        return Err(parse_err(path, ParseLocation::Line(1), "missing 'ply' magic"));
    }

    let mut encoding = None;
    let mut elements: Vec<ElementDecl> = Vec::new();
    loop {
        let text = line(reader, &mut lines, &mut bytes)?;
        let tokens: Vec<&str> = text.split_whitespace().collect();
        match tokens.as_slice() {
            [] | ["comment", ..] | ["obj_info", ..] => continue,
            ["end_header"] => break,
            ["format", fmt, "1.0"] => {
                encoding = Some(match *fmt {
                    "ascii" => PlyEncoding::Ascii,
                    "binary_little_endian" => PlyEncoding::BinaryLittleEndian,
                    other => {
                        return Err(parse_err(
                            path,
                            ParseLocation::Line(lines),
                            format!("unsupported format '{other}'"),
                        ))
                    }
                });
            }
            ["element", name, count] => {
                let count = count.parse::<usize>().map_err(|_| {
                    parse_err(
                        path,
                        ParseLocation::Line(lines),
                        format!("invalid element count '{count}'"),
                    )
                })?;
                elements.push(ElementDecl {
                    name: (*name).to_string(),
                    count,
                    properties: Vec::new(),
                });
            }
            ["property", "list", count_ty, item_ty, name] => {
                let decl = elements.last_mut().ok_or_else(|| {
                    parse_err(path, ParseLocation::Line(lines), "property before any element")
                })?;
                let count_ty = ScalarType::parse(count_ty, name).ok_or_else(|| {
                    parse_err(
                        path,
                        ParseLocation::Line(lines),
                        format!("unknown type '{count_ty}' for property '{name}'"),
                    )
                })?;
                let item_ty = ScalarType::parse(item_ty, name).ok_or_else(|| {
                    parse_err(
                        path,
                        ParseLocation::Line(lines),
                        format!("unknown type '{item_ty}' for property '{name}'"),
                    )
                })?;
                decl.properties.push(Property::List {
                    name: (*name).to_string(),
                    count_ty,
                    item_ty,
                });
            }
            ["property", ty, name] => {
                let decl = elements.last_mut().ok_or_else(|| {
                    parse_err(path, ParseLocation::Line(lines), "property before any element")
                })?;
                let ty = ScalarType::parse(ty, name).ok_or_else(|| {
                    parse_err(
                        path,
                        ParseLocation::Line(lines),
                        format!("unknown type '{ty}' for property '{name}'"),
                    )
                })?;
                decl.properties.push(Property::Scalar {
                    name: (*name).to_string(),
                    ty,
                });
            }
            _ => {
                return Err(parse_err(
                    path,
                    ParseLocation::Line(lines),
                    format!("unrecognized header line: '{text}'"),
                ))
            }
        }
    }

    let encoding = encoding
        .ok_or_else(|| parse_err(path, ParseLocation::Line(lines), "missing 'format' line"))?;
    Ok(Header {
        encoding,
        elements,
        header_lines: lines,
        header_bytes: bytes,
    })
}

fn parse_file(path: &Path) -> Result<Parsed> {
    let file = File::open(path)?;
    let mut reader = BufReader::new(file);
    let header = parse_header(&mut reader, path)?;

    let mut data = Vec::with_capacity(header.elements.len());
    match header.encoding {
        PlyEncoding::Ascii => {
            let mut line_no = header.header_lines;
            let mut lines = reader.lines();
            for decl in &header.elements {
                let mut rows = Vec::with_capacity(decl.count);
                for row_idx in 0..decl.count {
                    line_no += 1;
                    let text = match lines.next() {
                        Some(l) => l?,
                        None => {
                            return Err(parse_err(
                                path,
                                ParseLocation::Line(line_no),
                                format!(
                                    "element '{}' declares {} rows but the file ends after {}",
                                    decl.name, decl.count, row_idx
                                ),
                            ))
                        }
                    };
                    let mut tokens = text.split_whitespace();
                    let mut next_value = |prop: &str| -> Result<f64> {
                        tokens
                            .next()
                            .ok_or_else(|| {
                                parse_err(
                                    path,
                                    ParseLocation::Line(line_no),
                                    format!("missing value for property '{prop}'"),
                                )
                            })?
                            .parse::<f64>()
                            .map_err(|_| {
                                parse_err(
                                    path,
                                    ParseLocation::Line(line_no),
                                    format!("invalid number for property '{prop}'"),
                                )
                            })
                    };
                    let mut row = Vec::with_capacity(decl.properties.len());
                    for prop in &decl.properties {
                        match prop {
                            Property::Scalar { name, .. } => {
                                row.push(Value::Scalar(next_value(name)?));
                            }
                            Property::List { name, .. } => {
                                let n = next_value(name)? as usize;
                                let mut items = Vec::with_capacity(n);
                                for _ in 0..n {
                                    items.push(next_value(name)?);
                                }
                                row.push(Value::List(items));
                            }
                        }
                    }
                    rows.push(row);
                }
                data.push(rows);
            }
        }
        PlyEncoding::BinaryLittleEndian => {
            let mut offset = header.header_bytes;
            for decl in &header.elements {
                let mut rows = Vec::with_capacity(decl.count);
                for row_idx in 0..decl.count {
                    let mut row = Vec::with_capacity(decl.properties.len());
                    for prop in &decl.properties {
                        let read_one = |ty: ScalarType,
                                        reader: &mut BufReader<File>,
                                        offset: &mut u64|
                         -> Result<f64> {
                            let v = ty.read_binary(reader).map_err(|_| {
                                parse_err(
                                    path,
                                    ParseLocation::Byte(*offset),
                                    format!(
                                        "element '{}' declares {} rows but the file ends in row {}",
                                        decl.name, decl.count, row_idx
                                    ),
                                )
                            })?;
                            *offset += ty.byte_len();
                            Ok(v)
                        };
                        match prop {
                            Property::Scalar { ty, .. } => {
                                row.push(Value::Scalar(read_one(*ty, &mut reader, &mut offset)?));
                            }
                            Property::List {
                                count_ty, item_ty, ..
                            } => {
                                let n = read_one(*count_ty, &mut reader, &mut offset)? as usize;
                                let mut items = Vec::with_capacity(n);
                                for _ in 0..n {
                                    items.push(read_one(*item_ty, &mut reader, &mut offset)?);
                                }
                                row.push(Value::List(items));
                            }
                        }
                    }
                    rows.push(row);
                }
                data.push(rows);
            }
        }
    }

    Ok(Parsed { header, data })
}

fn property_index(decl: &ElementDecl, name: &str) -> Option<usize> {
    decl.properties.iter().position(|p| p.name() == name)
}

fn vertex_element<'a>(parsed: &'a Parsed, path: &Path) -> Result<(&'a ElementDecl, &'a [Vec<Value>])> {
    let idx = parsed
        .header
        .elements
        .iter()
        .position(|e| e.name == "vertex")
        .ok_or_else(|| parse_err(path, ParseLocation::Line(1), "no 'vertex' element"))?;
    Ok((&parsed.header.elements[idx], &parsed.data[idx]))
}

fn scalar(value: &Value) -> f64 {
    match value {
        Value::Scalar(v) => *v,
        Value::List(_) => f64::NAN,
    }
}

fn extract_vertices(
    decl: &ElementDecl,
    rows: &[Vec<Value>],
    path: &Path,
) -> Result<(Vec<Point3<f64>>, Option<Vec<[u8; 3]>>, Option<Vec<f64>>)> {
    let pos = ["x", "y", "z"]
        .map(|axis| property_index(decl, axis));
    let [px, py, pz] = pos;
    let (px, py, pz) = match (px, py, pz) {
        (Some(a), Some(b), Some(c)) => (a, b, c),
        _ => {
            return Err(parse_err(
                path,
                ParseLocation::Line(1),
                "vertex element lacks x/y/z properties",
            ))
        }
    };
    let color = [
        property_index(decl, "red"),
        property_index(decl, "green"),
        property_index(decl, "blue"),
    ];
    let scalar_idx = property_index(decl, "scalar_c2c");

    let mut points = Vec::with_capacity(rows.len());
    let mut colors = color[0].and(color[1]).and(color[2]).map(|_| Vec::new());
    let mut scalars = scalar_idx.map(|_| Vec::new());
    for row in rows {
        points.push(Point3::new(
            scalar(&row[px]),
            scalar(&row[py]),
            scalar(&row[pz]),
        ));
        if let Some(out) = &mut colors {
            out.push([
                scalar(&row[color[0].unwrap()]) as u8,
                scalar(&row[color[1].unwrap()]) as u8,
                scalar(&row[color[2].unwrap()]) as u8,
            ]);
        }
        if let Some(out) = &mut scalars {
            out.push(scalar(&row[scalar_idx.unwrap()]));
        }
    }
    Ok((points, colors, scalars))
}

pub fn read_ply_cloud(path: &Path) -> Result<PointCloud> {
    let parsed = parse_file(path)?;
    let (decl, rows) = vertex_element(&parsed, path)?;
    let (points, colors, scalars) = extract_vertices(decl, rows, path)?;
    let mut cloud = PointCloud::new(points)?;
    if let Some(c) = colors {
        cloud = cloud.with_colors(c)?;
    }
    if let Some(s) = scalars {
        cloud = cloud.with_scalars(s)?;
    }
    Ok(cloud)
}

pub fn read_ply_mesh(path: &Path) -> Result<TriangleMesh> {
    let parsed = parse_file(path)?;
    let (decl, rows) = vertex_element(&parsed, path)?;
    let (points, colors, _) = extract_vertices(decl, rows, path)?;

    let face_idx = parsed
        .header
        .elements
        .iter()
        .position(|e| e.name == "face")
        .ok_or_else(|| parse_err(path, ParseLocation::Line(1), "no 'face' element"))?;
    let face_decl = &parsed.header.elements[face_idx];
    let list_prop = face_decl
        .properties
        .iter()
        .position(|p| matches!(p, Property::List { .. }))
        .ok_or_else(|| {
            parse_err(path, ParseLocation::Line(1), "face element lacks an index list")
        })?;

    let mut triangles = Vec::new();
    let mut fanned = 0usize;
    for row in &parsed.data[face_idx] {
        let indices = match &row[list_prop] {
            Value::List(items) => items,
            Value::Scalar(_) => unreachable!("list property"),
        };
        if indices.len() < 3 {
            return Err(parse_err(
                path,
                ParseLocation::Line(1),
                format!("face with {} indices", indices.len()),
            ));
        }
        if indices.len() > 3 {
            fanned += 1;
        }
        // Fan split handles triangles, quads, and larger convex polygons.
        for k in 1..indices.len() - 1 {
            triangles.push([
                indices[0] as usize,
                indices[k] as usize,
                indices[k + 1] as usize,
            ]);
        }
    }
    if fanned > 0 {
        log::warn!("fan-triangulated {fanned} non-triangle faces in {}", path.display());
    }

    let mesh = TriangleMesh::new(points, triangles)?;
    match colors {
        Some(c) => mesh.with_colors(c),
        None => Ok(mesh),
    }
}

fn cloud_header(cloud: &PointCloud, encoding: PlyEncoding) -> String {
    let mut h = String::from("ply\n");
    h.push_str(match encoding {
        PlyEncoding::Ascii => "format ascii 1.0\n",
        PlyEncoding::BinaryLittleEndian => "format binary_little_endian 1.0\n",
    });
    h.push_str(&format!("element vertex {}\n", cloud.len()));
    h.push_str("property float x\nproperty float y\nproperty float z\n");
    if cloud.colors().is_some() {
        h.push_str("property uchar red\nproperty uchar green\nproperty uchar blue\n");
    }
    if cloud.scalars().is_some() {
        h.push_str("property float scalar_c2c\n");
    }
    h.push_str("end_header\n");
    h
}

pub fn write_ply_cloud(cloud: &PointCloud, path: &Path, encoding: PlyEncoding) -> Result<()> {
    let mut writer = BufWriter::new(File::create(path)?);
    writer.write_all(cloud_header(cloud, encoding).as_bytes())?;
    for (i, p) in cloud.points().iter().enumerate() {
        match encoding {
            PlyEncoding::Ascii => {
                write!(writer, "{} {} {}", p.x as f32, p.y as f32, p.z as f32)?;
                if let Some(colors) = cloud.colors() {
                    let [r, g, b] = colors[i];
                    write!(writer, " {r} {g} {b}")?;
                }
                if let Some(scalars) = cloud.scalars() {
                    write!(writer, " {}", scalars[i] as f32)?;
                }
                writeln!(writer)?;
            }
            PlyEncoding::BinaryLittleEndian => {
                writer.write_f32::<LittleEndian>(p.x as f32)?;
                writer.write_f32::<LittleEndian>(p.y as f32)?;
                writer.write_f32::<LittleEndian>(p.z as f32)?;
                if let Some(colors) = cloud.colors() {
                    writer.write_all(&colors[i])?;
                }
                if let Some(scalars) = cloud.scalars() {
                    writer.write_f32::<LittleEndian>(scalars[i] as f32)?;
                }
            }
        }
    }
    writer.flush()?;
    Ok(())
}

pub fn write_ply_mesh(mesh: &TriangleMesh, path: &Path, encoding: PlyEncoding) -> Result<()> {
    let mut writer = BufWriter::new(File::create(path)?);
    let mut h = String::from("ply\n");
    h.push_str(match encoding {
        PlyEncoding::Ascii => "format ascii 1.0\n",
        PlyEncoding::BinaryLittleEndian => "format binary_little_endian 1.0\n",
    });
    h.push_str(&format!("element vertex {}\n", mesh.vertices().len()));
    h.push_str("property float x\nproperty float y\nproperty float z\n");
    if mesh.colors().is_some() {
        h.push_str("property uchar red\nproperty uchar green\nproperty uchar blue\n");
    }
    h.push_str(&format!("element face {}\n", mesh.triangles().len()));
    h.push_str("property list uchar int vertex_indices\n");
    h.push_str("end_header\n");
    writer.write_all(h.as_bytes())?;

    for (i, v) in mesh.vertices().iter().enumerate() {
        match encoding {
            PlyEncoding::Ascii => {
                write!(writer, "{} {} {}", v.x as f32, v.y as f32, v.z as f32)?;
                if let Some(colors) = mesh.colors() {
                    let [r, g, b] = colors[i];
                    write!(writer, " {r} {g} {b}")?;
                }
                writeln!(writer)?;
            }
            PlyEncoding::BinaryLittleEndian => {
                writer.write_f32::<LittleEndian>(v.x as f32)?;
                writer.write_f32::<LittleEndian>(v.y as f32)?;
                writer.write_f32::<LittleEndian>(v.z as f32)?;
                if let Some(colors) = mesh.colors() {
                    writer.write_all(&colors[i])?;
                }
            }
        }
    }
    for tri in mesh.triangles() {
        match encoding {
            PlyEncoding::Ascii => {
                writeln!(writer, "3 {} {} {}", tri[0], tri[1], tri[2])?;
            }
            PlyEncoding::BinaryLittleEndian => {
                writer.write_u8(3)?;
                for &idx in tri {
                    writer.write_i32::<LittleEndian>(idx as i32)?;
                }
            }
        }
    }
    writer.flush()?;
    Ok(())
}
