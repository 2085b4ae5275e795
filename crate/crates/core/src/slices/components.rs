use std::collections::VecDeque;

use super::{ConnectivityVerdict, Evidence, SliceImage, Verdict, Window};

/// Label 8-connected components of bounded cells. A component that never
/// reaches the window edge is compact at this resolution.
pub fn detect_compact_components(img: &SliceImage) -> ConnectivityVerdict {
    let (w, h) = (img.width, img.height);
    let bounded = |i: u32, j: u32| img.cell_status(i, j).counts_as_bounded();
    let mut seen = vec![false; (w * h) as usize];
    let mut best: Option<([u32; 4], usize)> = None;
    let mut any = false;
    let mut all = true;
    let mut queue = VecDeque::new();

    for j in 0..h {
        for i in 0..w {
            if !bounded(i, j) {
                all = false;
                continue;
            }
            any = true;
            if seen[img.index(i, j)] {
                continue;
            }
            seen[img.index(i, j)] = true;
            queue.push_back((i, j));
            let mut bbox = [i, j, i, j];
            let mut size = 0usize;
            let mut touches = false;
            while let Some((ci, cj)) = queue.pop_front() {
                size += 1;
                touches |= ci == 0 || cj == 0 || ci == w - 1 || cj == h - 1;
                bbox = [bbox[0].min(ci), bbox[1].min(cj), bbox[2].max(ci), bbox[3].max(cj)];
                for dj in -1i64..=1 {
                    for di in -1i64..=1 {
                        let (ni, nj) = (ci as i64 + di, cj as i64 + dj);
                        if ni < 0 || nj < 0 || ni >= w as i64 || nj >= h as i64 {
                            continue;
                        }
                        let (ni, nj) = (ni as u32, nj as u32);
                        let k = img.index(ni, nj);
                        if !seen[k] && bounded(ni, nj) {
                            seen[k] = true;
                            queue.push_back((ni, nj));
                        }
                    }
                }
            }
            if !touches && best.is_none_or(|(_, s)| size > s) {
                best = Some((bbox, size));
            }
        }
    }

    let (verdict, evidence) = if all || !any {
        (Verdict::Undecided, None)
    } else if let Some((cells, size)) = best {
        (
            Verdict::UnstablyDisconnected,
            Some(Evidence::Component {
                cells,
                window: cell_box(img, cells),
                size,
            }),
        )
    } else {
        (Verdict::UnstablyConnectedAtResolution, None)
    };
    ConnectivityVerdict {
        verdict,
        evidence,
        method: "compact_components".into(),
        window: img.window,
        width: w,
        height: h,
        depth: img.depth().unwrap_or(0),
    }
}

/// The region of the plane covered by a box of cells.
fn cell_box(img: &SliceImage, [i0, j0, i1, j1]: [u32; 4]) -> Window {
    let win = img.window;
    let dx = (win.x1 - win.x0) / img.width as f64;
    let dy = (win.y1 - win.y0) / img.height as f64;
    Window {
        x0: win.x0 + i0 as f64 * dx,
        x1: win.x0 + (i1 + 1) as f64 * dx,
        y0: win.y1 - (j1 + 1) as f64 * dy,
        y1: win.y1 - j0 as f64 * dy,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::slices::{CellStatus, Provenance};

    fn synthetic(w: u32, h: u32, bounded: impl Fn(u32, u32) -> bool) -> SliceImage {
        let mut status = Vec::new();
        for j in 0..h {
            for i in 0..w {
                status.push(if bounded(i, j) {
                    CellStatus::Bounded
                } else {
                    CellStatus::Escaped
                } as u8);
            }
        }
        SliceImage {
            width: w,
            height: h,
            window: Window::new(0.0, 0.0, w as f64, h as f64).unwrap(),
            rate: status.iter().map(|&s| if s == 0 { 1.0 } else { 0.0 }).collect(),
            status,
            provenance: Provenance::Parameter {
                region: crate::slices::ParamRegion::AB {
                    a0: 0.0,
                    a1: 1.0,
                    b0: 0.1,
                    b1: 0.2,
                },
                probe: crate::slices::Probe::Connectivity,
                budget: Default::default(),
            },
        }
    }

    #[test]
    fn interior_blob_is_compact() {
        let img = synthetic(20, 20, |i, j| (5..8).contains(&i) && (9..11).contains(&j));
        let v = detect_compact_components(&img);
        assert_eq!(v.verdict, Verdict::UnstablyDisconnected);
        match v.evidence {
            Some(Evidence::Component { cells, size, .. }) => {
                assert_eq!(cells, [5, 9, 7, 10]);
                assert_eq!(size, 6);
            }
            other => panic!("unexpected evidence {other:?}"),
        }
    }

    #[test]
    fn band_across_window_is_connected() {
        let img = synthetic(20, 20, |i, j| (i as i64 - j as i64).abs() <= 1);
        assert_eq!(
            detect_compact_components(&img).verdict,
            Verdict::UnstablyConnectedAtResolution
        );
    }

    #[test]
    fn diagonal_neighbours_join() {
        let img = synthetic(10, 10, |i, j| i == j);
        assert_eq!(
            detect_compact_components(&img).verdict,
            Verdict::UnstablyConnectedAtResolution
        );
    }

    #[test]
    fn full_or_empty_window_is_undecided() {
        assert_eq!(
            detect_compact_components(&synthetic(8, 8, |_, _| true)).verdict,
            Verdict::Undecided
        );
        assert_eq!(
            detect_compact_components(&synthetic(8, 8, |_, _| false)).verdict,
            Verdict::Undecided
        );
    }
}
