//! Layouts, windowed snippets and the JSON layout format.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, GeometryError, Result};
use crate::geom::{clip_polygon, validate_polygon, Dihedral, LayoutPolygon, Point, Rect};

#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct Layout {
    pub polygons: Vec<LayoutPolygon>,
    pub layer_id: i32,
}

impl Layout {
    pub fn new(polygons: Vec<LayoutPolygon>, layer_id: i32) -> Self {
        Layout { polygons, layer_id }
    }

    /// Bounding box of all polygons, or `None` for an empty layout.
    pub fn bbox(&self) -> Option<Rect> {
        let mut it = self.polygons.iter().map(|p| p.bbox());
        let first = it.next()?;
        Some(it.fold(first, |a, b| Rect::new(a.x0.min(b.x0), a.y0.min(b.y0), a.x1.max(b.x1), a.y1.max(b.y1))))
    }

    /// The whole layout as one snippet whose window leaves a margin around
    /// every polygon, so no edge is mistaken for a window cut.
    pub fn as_snippet(&self, id: &str) -> PatternSnippet {
        let bb = self.bbox().unwrap_or(Rect::new(0, 0, 2, 2)).expand(2);
        let center = Point::new((bb.x0 + bb.x1) / 2, (bb.y0 + bb.y1) / 2);
        let w = 2 * (center.x - bb.x0).max(bb.x1 - center.x);
        let h = 2 * (center.y - bb.y0).max(bb.y1 - center.y);
        let mut s = PatternSnippet::new(id, center, (w, h));
        s.polygons = self.polygons.clone();
        s
    }

    pub fn from_json_str(text: &str) -> Result<Layout> {
        let file: LayoutFile = serde_json::from_str(text)?;
        if file.units != "nm" {
            return Err(Error::Units(file.units));
        }
        match file.layers.len() {
            0 => return Ok(Layout::default()),
            1 => {}
            n => return Err(Error::MultiLayer(n)),
        }
        let layer = &file.layers[0];
        let mut polygons = Vec::with_capacity(layer.polygons.len());
        for verts in &layer.polygons {
            let p = LayoutPolygon::new(verts.clone(), layer.id);
            validate_polygon(&p).map_err(GeometryError::Invalid)?;
            polygons.push(p);
        }
        Ok(Layout::new(polygons, layer.id))
    }

    pub fn to_json_string(&self) -> String {
        let file = LayoutFile {
            units: "nm".into(),
            layers: vec![LayerEntry { id: self.layer_id, polygons: self.polygons.iter().map(|p| p.vertices.clone()).collect() }],
        };
        serde_json::to_string(&file).expect("layout serializes")
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Layout> {
        let text = std::fs::read_to_string(path.as_ref()).map_err(|e| Error::io(path.as_ref(), e))?;
        Layout::from_json_str(&text)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path.as_ref(), self.to_json_string()).map_err(|e| Error::io(path.as_ref(), e))
    }
}

#[derive(Serialize, Deserialize)]
struct LayoutFile {
    units: String,
    layers: Vec<LayerEntry>,
}

#[derive(Serialize, Deserialize)]
struct LayerEntry {
    id: i32,
    polygons: Vec<Vec<Point>>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DefectKind {
    Pinch,
    Bridge,
}

impl DefectKind {
    pub fn as_str(self) -> &'static str {
        match self {
            DefectKind::Pinch => "pinch",
            DefectKind::Bridge => "bridge",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Label {
    Hotspot(DefectKind),
    NonHotspot,
}

impl Label {
    pub fn is_hotspot(self) -> bool {
        matches!(self, Label::Hotspot(_))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    Original,
    Synthetic { parent_id: String },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PatternSnippet {
    pub id: String,
    pub window_center: Point,
    pub window_size: (i64, i64),
    pub polygons: Vec<LayoutPolygon>,
    /// A boundary point identifying the anchor fragment.
    #[serde(default)]
    pub anchor: Option<Point>,
    #[serde(default)]
    pub label: Option<Label>,
    pub provenance: Provenance,
}

impl PatternSnippet {
    pub fn new(id: &str, center: Point, size: (i64, i64)) -> Self {
        PatternSnippet {
            id: id.to_string(),
            window_center: center,
            window_size: size,
            polygons: Vec::new(),
            anchor: None,
            label: None,
            provenance: Provenance::Original,
        }
    }

    pub fn window(&self) -> Rect {
        Rect::centered(self.window_center, self.window_size.0, self.window_size.1)
    }

    pub fn is_hotspot(&self) -> bool {
        self.label.is_some_and(|l| l.is_hotspot())
    }

    pub fn translated(&self, dx: i64, dy: i64) -> Self {
        let mut s = self.clone();
        s.window_center = Point::new(s.window_center.x + dx, s.window_center.y + dy);
        s.polygons = s.polygons.iter().map(|p| p.translated(dx, dy)).collect();
        s.anchor = s.anchor.map(|a| Point::new(a.x + dx, a.y + dy));
        s
    }

    /// Applies a grid symmetry about the window center.
    pub fn transformed(&self, t: Dihedral) -> Self {
        let c = self.window_center;
        let map = |p: Point| {
            let q = t.apply(Point::new(p.x - c.x, p.y - c.y));
            Point::new(q.x + c.x, q.y + c.y)
        };
        let mut s = self.clone();
        s.polygons = self.polygons.iter().map(|p| p.translated(-c.x, -c.y).transformed(t).translated(c.x, c.y)).collect();
        s.anchor = self.anchor.map(map);
        if t.quarter_turns % 2 == 1 {
            s.window_size = (self.window_size.1, self.window_size.0);
        }
        s
    }

    /// Translation-normalized geometry used to detect duplicate variants.
    pub fn geometry_key(&self) -> GeometryKey {
        let c = self.window_center;
        let mut polys: Vec<Vec<Point>> = self.polygons.iter().map(|p| p.translated(-c.x, -c.y).normalized_start()).collect();
        polys.sort();
        GeometryKey { size: self.window_size, polygons: polys }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct GeometryKey {
    pub size: (i64, i64),
    pub polygons: Vec<Vec<Point>>,
}

/// Clips the layout to a `w x h` window centered at `center`.
pub fn extract_window(l: &Layout, center: Point, size: (i64, i64)) -> PatternSnippet {
    assert!(size.0 > 0 && size.1 > 0, "window size must be positive");
    let mut s = PatternSnippet::new("", center, size);
    let win = s.window();
    for p in &l.polygons {
        s.polygons.extend(clip_polygon(p, &win));
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rect(x0: i64, y0: i64, x1: i64, y1: i64) -> LayoutPolygon {
        Rect::new(x0, y0, x1, y1).to_polygon(1)
    }

    #[test]
    fn window_inside_rectangle() {
        let l = Layout::new(vec![rect(0, 0, 1000, 1000)], 1);
        let s = extract_window(&l, Point::new(500, 500), (100, 100));
        assert_eq!(s.polygons.len(), 1);
        assert_eq!(s.polygons[0].bbox(), Rect::new(450, 450, 550, 550));
    }

    #[test]
    fn empty_window() {
        let l = Layout::new(vec![rect(0, 0, 100, 100)], 1);
        let s = extract_window(&l, Point::new(5000, 5000), (100, 100));
        assert!(s.polygons.is_empty());
    }

    #[test]
    fn json_round_trip_and_multilayer_rejection() {
        let l = Layout::new(vec![rect(0, 0, 100, 50)], 1);
        let text = l.to_json_string();
        assert_eq!(Layout::from_json_str(&text).unwrap(), l);
        let multi = r#"{"units":"nm","layers":[{"id":1,"polygons":[]},{"id":2,"polygons":[]}]}"#;
        assert!(matches!(Layout::from_json_str(multi), Err(Error::MultiLayer(2))));
        let cw = r#"{"units":"nm","layers":[{"id":1,"polygons":[[[0,0],[0,5],[5,5],[5,0]]]}]}"#;
        assert!(Layout::from_json_str(cw).is_err());
    }

    #[test]
    fn geometry_key_ignores_translation() {
        let mut a = PatternSnippet::new("a", Point::new(0, 0), (200, 200));
        a.polygons.push(rect(-50, -20, 50, 20));
        let b = a.translated(37, -11);
        assert_eq!(a.geometry_key(), b.geometry_key());
    }
}
