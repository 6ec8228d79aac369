use crate::error::{Error, Result};
use crate::segmentation::BinaryMask;

/// Clockwise (on screen, y down) Moore neighbourhood starting east.
const DIRS: [(isize, isize); 8] = [(1, 0), (1, 1), (0, 1), (-1, 1), (-1, 0), (-1, -1), (0, -1), (1, -1)];
const WEST: usize = 4;

/// Closed, 8-connected outer boundary; the last point links back to the first.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Contour {
    pub points: Vec<(usize, usize)>,
}

impl Contour {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Consecutive point pairs including the closing link.
    pub fn links(&self) -> impl Iterator<Item = ((usize, usize), (usize, usize))> + '_ {
        let n = self.points.len();
        (0..n).map(move |i| (self.points[i], self.points[(i + 1) % n]))
    }
}

fn dir_index(dx: isize, dy: isize) -> usize {
    DIRS.iter().position(|&d| d == (dx, dy)).expect("neighbour offset")
}

/// Next boundary pixel clockwise from the backtrack direction, and the new
/// backtrack direction as seen from that pixel.
fn step(mask: &BinaryMask, cur: (usize, usize), back: usize) -> Option<((usize, usize), usize)> {
    let (cx, cy) = (cur.0 as isize, cur.1 as isize);
    for k in 1..=8 {
        let d = (back + k) % 8;
        let (nx, ny) = (cx + DIRS[d].0, cy + DIRS[d].1);
        if mask.get_signed(nx, ny) {
            let prev = (back + k - 1) % 8;
            let (bx, by) = (cx + DIRS[prev].0, cy + DIRS[prev].1);
            return Some(((nx as usize, ny as usize), dir_index(bx - nx, by - ny)));
        }
    }
    None
}

/// Moore-neighbour tracing of the outer boundary of the component holding
/// the topmost-then-leftmost true pixel. Stops when the start pixel is about
/// to repeat its first move.
pub fn trace_contour(mask: &BinaryMask) -> Result<Contour> {
    let first = mask.bits().iter().position(|&b| b).ok_or(Error::EmptyMask)?;
    let start = (first % mask.width(), first / mask.width());
    let Some((second, back0)) = step(mask, start, WEST) else {
        return Ok(Contour { points: vec![start] });
    };

    let mut points = vec![start, second];
    let (mut cur, mut back) = (second, back0);
    let cap = 4 * mask.width() * mask.height() + 8;
    loop {
        let (next, nb) = step(mask, cur, back).expect("boundary pixel has a neighbour");
        if cur == start && next == second {
            points.pop();
            break;
        }
        points.push(next);
        cur = next;
        back = nb;
        debug_assert!(points.len() <= cap, "contour tracing did not terminate");
    }
    Ok(Contour { points })
}
