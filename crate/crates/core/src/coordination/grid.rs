use crate::geom::{Shape, Vec2};
use crate::world::WorldState;

/// Labels of objects tall enough to count as static obstacles.
const TALL_LABELS: &[&str] = &["bottle", "mug", "cup", "lamp", "pencil_cup", "vase", "box"];

/// Shared occupancy map of the table plane, static obstacles only.
#[derive(Debug, Clone, PartialEq)]
pub struct OccupancyGrid {
    pub cell_size: f64,
    pub cols: usize,
    pub rows: usize,
    occupied: Vec<bool>,
}

impl OccupancyGrid {
    pub fn new(width: f64, depth: f64, cell_size: f64) -> Self {
        assert!(cell_size > 0.0, "cell size must be positive");
        let cols = (width / cell_size - 1e-9).ceil().max(1.0) as usize;
        let rows = (depth / cell_size - 1e-9).ceil().max(1.0) as usize;
        Self {
            cell_size,
            cols,
            rows,
            occupied: vec![false; cols * rows],
        }
    }

    /// Grid with the footprints of tall, un-held objects marked.
    pub fn from_world(world: &WorldState, cell_size: f64) -> Self {
        let mut g = Self::new(world.table.width, world.table.depth, cell_size);
        for o in world
            .objects
            .iter()
            .filter(|o| o.held_by.is_none() && TALL_LABELS.contains(&o.label.as_str()))
        {
            let fp = o.footprint();
            for (c, r) in g.cells_in(fp.x_min, fp.y_min, fp.x_max, fp.y_max) {
                let idx = r * g.cols + c;
                g.occupied[idx] = true;
            }
        }
        g
    }

    fn cells_in(&self, x0: f64, y0: f64, x1: f64, y1: f64) -> impl Iterator<Item = (usize, usize)> {
        let cs = self.cell_size;
        let clamp_c = |v: f64| ((v / cs).floor().max(0.0) as usize).min(self.cols - 1);
        let clamp_r = |v: f64| ((v / cs).floor().max(0.0) as usize).min(self.rows - 1);
        let (c0, c1, r0, r1) = (clamp_c(x0), clamp_c(x1), clamp_r(y0), clamp_r(y1));
        (r0..=r1).flat_map(move |r| (c0..=c1).map(move |c| (c, r)))
    }

    pub fn cell_center(&self, col: usize, row: usize) -> Vec2 {
        Vec2::new(
            (col as f64 + 0.5) * self.cell_size,
            (row as f64 + 0.5) * self.cell_size,
        )
    }

    pub fn is_occupied(&self, col: usize, row: usize) -> bool {
        self.occupied[row * self.cols + col]
    }

    pub fn occupied_count(&self) -> usize {
        self.occupied.iter().filter(|&&o| o).count()
    }

    /// Number of obstacle cells whose centers fall inside `shape`.
    pub fn obstacle_cells_under(&self, shape: &Shape) -> usize {
        let b = shape.bounds();
        self.cells_in(b.x_min, b.y_min, b.x_max, b.y_max)
            .filter(|&(c, r)| self.is_occupied(c, r) && shape.contains(self.cell_center(c, r)))
            .count()
    }
}
