//! Wavefront OBJ reading and writing with quads preserved.
//!
//! Corner attributes (`vt`, `vn`) are attached to vertices. A position whose
//! corners all agree on their attribute indices becomes one vertex; a
//! position with several distinct combinations (a UV or normal seam) is
//! split into one vertex per combination. The optional `v x y z r g b`
//! colour extension is read and written as a per-vertex colour.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::Path;

use crate::attributes::VertexAttributes;
use crate::mesh::{Mesh, VertexId};
use crate::{Error, Result, Vec3};

pub fn read_obj(path: impl AsRef<Path>) -> Result<Mesh> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_owned(),
        source,
    })?;
    parse_obj(&text, path)
}

#[derive(Clone, Copy, PartialEq, Eq, Hash)]
struct Corner {
    v: usize,
    t: Option<usize>,
    n: Option<usize>,
}

/// Parse OBJ text; `path` is only used in error messages.
pub fn parse_obj(text: &str, path: &Path) -> Result<Mesh> {
    let mut positions: Vec<Vec3> = Vec::new();
    let mut colors: Vec<Option<[f64; 3]>> = Vec::new();
    let mut uvs: Vec<[f64; 2]> = Vec::new();
    let mut normals: Vec<Vec3> = Vec::new();
    let mut polys: Vec<Vec<Corner>> = Vec::new();
    let (mut saw_abs, mut saw_rel) = (false, false);

    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        let err = |message: String| Error::Parse {
            path: path.to_owned(),
            line: lineno + 1,
            message,
        };
        let mut tok = line.split_whitespace();
        let Some(tag) = tok.next() else { continue };
        let nums = |tok: std::str::SplitWhitespace<'_>| -> Result<Vec<f64>> {
            tok.map(|t| t.parse::<f64>().map_err(|_| err(format!("bad number `{t}`"))))
                .collect()
        };
        match tag {
            "v" => {
                let n = nums(tok)?;
                match n.len() {
                    3 | 4 => colors.push(None),
                    6 => colors.push(Some([n[3], n[4], n[5]])),
                    k => return Err(err(format!("vertex with {k} components"))),
                }
                positions.push(Vec3::new(n[0], n[1], n[2]));
            }
            "vt" => {
                let n = nums(tok)?;
                if !(1..=3).contains(&n.len()) {
                    return Err(err(format!("texture coordinate with {} components", n.len())));
                }
                uvs.push([n[0], n.get(1).copied().unwrap_or(0.0)]);
            }
            "vn" => {
                let n = nums(tok)?;
                if n.len() != 3 {
                    return Err(err(format!("normal with {} components", n.len())));
                }
                normals.push(Vec3::new(n[0], n[1], n[2]));
            }
            "f" => {
                let mut poly = Vec::new();
                for t in tok {
                    let mut parts = t.split('/');
                    let mut index = |count: usize, what: &str, required: bool| -> Result<Option<usize>> {
                        let s = parts.next().unwrap_or("");
                        if s.is_empty() {
                            return if required {
                                Err(err(format!("missing {what} index in `{t}`")))
                            } else {
                                Ok(None)
                            };
                        }
                        let i: i64 = s.parse().map_err(|_| err(format!("bad {what} index `{s}`")))?;
                        let resolved = if i > 0 {
                            saw_abs = true;
                            i - 1
                        } else if i < 0 {
                            saw_rel = true;
                            count as i64 + i
                        } else {
                            return Err(err(format!("zero {what} index")));
                        };
                        if saw_abs && saw_rel {
                            return Err(err("mixed absolute and relative indices".into()));
                        }
                        if resolved < 0 || resolved as usize >= count {
                            return Err(err(format!("{what} index {i} out of range")));
                        }
                        Ok(Some(resolved as usize))
                    };
                    let v = index(positions.len(), "vertex", true)?.expect("required");
                    let t = index(uvs.len(), "texture", false)?;
                    let n = index(normals.len(), "normal", false)?;
                    poly.push(Corner { v, t, n });
                }
                match poly.len() {
                    0..=2 => return Err(err(format!("face with {} vertices", poly.len()))),
                    3 | 4 => polys.push(poly),
                    k => {
                        log::warn!(
                            "{}:{}: fan-triangulating {k}-gon",
                            path.display(),
                            lineno + 1
                        );
                        for i in 1..k - 1 {
                            polys.push(vec![poly[0], poly[i], poly[i + 1]]);
                        }
                    }
                }
            }
            _ => log::debug!("{}:{}: ignoring `{tag}`", path.display(), lineno + 1),
        }
    }

    // Distinct attribute combinations per position, in order of appearance.
    let mut combos: Vec<Vec<(Option<usize>, Option<usize>)>> = vec![Vec::new(); positions.len()];
    for c in polys.iter().flatten() {
        let list = &mut combos[c.v];
        if !list.contains(&(c.t, c.n)) {
            list.push((c.t, c.n));
        }
    }
    let has_uv = polys.iter().flatten().any(|c| c.t.is_some());
    let has_n = polys.iter().flatten().any(|c| c.n.is_some());
    let has_color = colors.iter().any(Option::is_some);

    let mut out_pos = Vec::new();
    let mut out_uv = Vec::new();
    let mut out_n = Vec::new();
    let mut out_col = Vec::new();
    let mut id_of: HashMap<Corner, VertexId> = HashMap::new();
    for (v, list) in combos.iter().enumerate() {
        let push = |t: Option<usize>, n: Option<usize>, out_pos: &mut Vec<Vec3>, out_uv: &mut Vec<[f64; 2]>, out_n: &mut Vec<Vec3>, out_col: &mut Vec<[f64; 3]>| {
            out_pos.push(positions[v]);
            out_uv.push(t.map_or([0.0, 0.0], |t| uvs[t]));
            out_n.push(n.map_or(Vec3::zeros(), |n| normals[n]));
            out_col.push(colors[v].unwrap_or([1.0, 1.0, 1.0]));
            (out_pos.len() - 1) as VertexId
        };
        if list.is_empty() {
            push(None, None, &mut out_pos, &mut out_uv, &mut out_n, &mut out_col);
            continue;
        }
        for &(t, n) in list {
            let id = push(t, n, &mut out_pos, &mut out_uv, &mut out_n, &mut out_col);
            id_of.insert(Corner { v, t, n }, id);
        }
    }
    let faces: Vec<Vec<VertexId>> = polys
        .iter()
        .map(|p| p.iter().map(|c| id_of[c]).collect())
        .collect();
    let attributes = VertexAttributes {
        uvs: has_uv.then_some(out_uv),
        normals: has_n.then_some(out_n),
        colors: has_color.then_some(out_col),
        joints: None,
    };
    Mesh::new(out_pos, &faces, attributes).map_err(|e| Error::Parse {
        path: path.to_owned(),
        line: 0,
        message: e.to_string(),
    })
}

/// Serialise live faces and the vertices they reference. Floats use the
/// shortest representation that round-trips exactly.
pub fn format_obj(mesh: &Mesh) -> String {
    let m = mesh.compact();
    let attrs = m.attributes();
    let mut s = String::new();
    let _ = writeln!(s, "# {} vertices, {} quads, {} triangles", m.vertex_count(), m.quad_count(), m.tri_count());
    for (i, p) in m.positions().iter().enumerate() {
        match &attrs.colors {
            Some(c) => {
                let c = c[i];
                let _ = writeln!(s, "v {:?} {:?} {:?} {:?} {:?} {:?}", p.x, p.y, p.z, c[0], c[1], c[2]);
            }
            None => {
                let _ = writeln!(s, "v {:?} {:?} {:?}", p.x, p.y, p.z);
            }
        }
    }
    if let Some(uv) = &attrs.uvs {
        for t in uv {
            let _ = writeln!(s, "vt {:?} {:?}", t[0], t[1]);
        }
    }
    if let Some(n) = &attrs.normals {
        for n in n {
            let _ = writeln!(s, "vn {:?} {:?} {:?}", n.x, n.y, n.z);
        }
    }
    let (t, n) = (attrs.uvs.is_some(), attrs.normals.is_some());
    for (_, f) in m.faces() {
        s.push('f');
        for &v in f.vertices() {
            let i = v + 1;
            let _ = match (t, n) {
                (false, false) => write!(s, " {i}"),
                (true, false) => write!(s, " {i}/{i}"),
                (false, true) => write!(s, " {i}//{i}"),
                (true, true) => write!(s, " {i}/{i}/{i}"),
            };
        }
        s.push('\n');
    }
    s
}

pub fn write_obj(mesh: &Mesh, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, format_obj(mesh)).map_err(|source| Error::Io {
        path: path.to_owned(),
        source,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::io::synth;

    fn parse(s: &str) -> Result<Mesh> {
        parse_obj(s, Path::new("test.obj"))
    }

    #[test]
    fn reads_one_quad() {
        let m = parse("v 0 0 0\nv 1 0 0\nv 1 1 0\nv 0 1 0\nf 1 2 3 4\n").unwrap();
        assert_eq!((m.quad_count(), m.tri_count()), (1, 0));
    }

    #[test]
    fn relative_indices() {
        let m = parse("v 0 0 0\nv 1 0 0\nv 1 1 0\nf -3 -2 -1\n").unwrap();
        assert_eq!(m.face(0).unwrap().vertices(), &[0, 1, 2]);
    }

    #[test]
    fn mixed_indices_are_rejected() {
        let r = parse("v 0 0 0\nv 1 0 0\nv 1 1 0\nf 1 -2 3\n");
        assert!(matches!(r, Err(Error::Parse { line: 4, .. })));
    }

    #[test]
    fn pentagon_is_fanned() {
        let m = parse("v 0 0 0\nv 1 0 0\nv 2 1 0\nv 1 2 0\nv 0 1 0\nf 1 2 3 4 5\n").unwrap();
        assert_eq!((m.quad_count(), m.tri_count()), (0, 3));
    }

    #[test]
    fn malformed_line_reports_line_number() {
        let r = parse("v 0 0 0\nv 1 0 oops\n");
        match r {
            Err(Error::Parse { line, message, .. }) => {
                assert_eq!(line, 2);
                assert!(message.contains("oops"));
            }
            other => panic!("{other:?}"),
        }
        assert!(matches!(parse("v 0 0 0\nf 1 2 3\n"), Err(Error::Parse { line: 2, .. })));
    }

    #[test]
    fn seams_split_vertices() {
        let text = "v 0 0 0\nv 1 0 0\nv 1 1 0\nv 0 1 0\nv 2 0 0\nvt 0 0\nvt 1 0\nvt 1 1\nvt 0 1\nvt 0.5 0\n\
                    f 1/1 2/2 3/3 4/4\nf 2/5 5/2 3/3\n";
        let m = parse(text).unwrap();
        // Position 2 carries two different UVs.
        assert_eq!(m.vertex_count(), 6);
        assert!(m.attributes().uvs.is_some());
    }

    #[test]
    fn round_trip_is_bit_exact() {
        let mut m = synth::subdivided_cube(3);
        let n = m.vertex_slots();
        let jitter: Vec<Vec3> = m
            .positions()
            .iter()
            .enumerate()
            .map(|(i, p)| p + Vec3::new(1e-7 * i as f64, 1.0 / 3.0, -0.1))
            .collect();
        m = m.with_positions(jitter);
        m.attributes_mut().uvs = Some((0..n).map(|i| [i as f64 / 7.0, 0.1]).collect());
        m.attributes_mut().normals = Some((0..n).map(|i| Vec3::new(0.0, (i as f64).sin(), 1.0)).collect());
        let back = parse(&format_obj(&m)).unwrap();
        assert_eq!(back.positions(), m.positions());
        assert_eq!(back.attributes(), m.attributes());
        let fa: Vec<_> = m.faces().map(|(_, f)| *f).collect();
        let fb: Vec<_> = back.faces().map(|(_, f)| *f).collect();
        assert_eq!(fa, fb);
    }

    #[test]
    fn empty_mesh_round_trips() {
        let s = format_obj(&Mesh::empty());
        let m = parse(&s).unwrap();
        assert!(m.is_empty());
        assert_eq!(m.vertex_count(), 0);
    }

    #[test]
    fn colors_round_trip() {
        let m = parse("v 0 0 0 1 0 0\nv 1 0 0 0 1 0\nv 0 1 0 0 0 1\nf 1 2 3\n").unwrap();
        assert_eq!(m.attributes().colors.as_ref().unwrap()[1], [0.0, 1.0, 0.0]);
        let back = parse(&format_obj(&m)).unwrap();
        assert_eq!(back.attributes(), m.attributes());
    }

    #[test]
    fn write_to_bad_path_fails() {
        let r = write_obj(&Mesh::empty(), "/nonexistent-dir/x/y.obj");
        assert!(matches!(r, Err(Error::Io { .. })));
    }
}
