//! Tiling properties shared by the property tests and the acceptance run.

#![allow(dead_code)]

use std::collections::HashSet;

use proptest::prelude::*;
use proptest::test_runner::TestCaseError;
use tilekit::{linearise, project, translate, Coord, DimName, Tile};

pub const NAMES: [char; 4] = ['a', 'b', 'c', 'd'];

pub fn names(rank: usize) -> Vec<DimName> {
    NAMES[..rank].iter().map(|&c| DimName::new(c)).collect()
}

fn coord(dims: &[DimName], vals: &[isize]) -> Coord {
    let pairs: Vec<(DimName, isize)> = dims.iter().copied().zip(vals.iter().copied()).collect();
    Coord::new(&pairs).unwrap()
}

/// A tile of rank 1 to 4 with arbitrary base and offset.
pub fn tile() -> impl Strategy<Value = Tile> {
    (1usize..=4).prop_flat_map(|rank| {
        (
            prop::collection::vec(-50isize..50, rank),
            prop::collection::vec(-50isize..50, rank),
            prop::collection::vec(1isize..=6, rank),
        )
            .prop_map(move |(base, offset, size)| {
                let d = names(rank);
                Tile::with_position(coord(&d, &base), coord(&d, &offset), coord(&d, &size)).unwrap()
            })
    })
}

/// Parent tile, subtile extents (dimension order shuffled), entity count.
pub fn partition_case() -> impl Strategy<Value = (Tile, Coord, usize)> {
    (1usize..=4)
        .prop_flat_map(|rank| {
            (
                prop::collection::vec(1usize..=3, rank),
                prop::collection::vec(1usize..=3, rank),
                prop::collection::vec(-20isize..20, rank),
                Just(names(rank)).prop_shuffle(),
                any::<prop::sample::Index>(),
            )
        })
        .prop_map(|(sub, grid, base, order, pick)| {
            let d = names(sub.len());
            let size: Vec<isize> = sub.iter().zip(&grid).map(|(&s, &g)| (s * g) as isize).collect();
            let b = coord(&d, &base);
            let parent = Tile::with_position(b, Coord::zeros(b.dims()), coord(&d, &size)).unwrap();
            let sub_pairs: Vec<(DimName, usize)> = order
                .iter()
                .map(|n| (*n, sub[d.iter().position(|x| x == n).unwrap()]))
                .collect();
            let cells: usize = grid.iter().product();
            let divisors: Vec<usize> = (1..=cells).filter(|c| cells % c == 0).collect();
            (
                parent,
                Coord::extents(&sub_pairs).unwrap(),
                divisors[pick.index(divisors.len())],
            )
        })
}

/// Every cell of the parent is covered exactly once, every entity runs the
/// same number of iterations, and iteration `k` of entity `i` is grid cell
/// `i + k·count` in column-major order.
pub fn check_partition(parent: &Tile, sub: &Coord, count: usize) -> Result<(), TestCaseError> {
    let dims = parent.dims();
    let rank = parent.rank();
    let sub = sub.aligned_to(dims).unwrap();
    let origin = parent.position();
    let grid: Vec<isize> = (0..rank).map(|d| parent.extent(d) as isize / sub.values()[d]).collect();
    let cells: usize = grid.iter().product::<isize>() as usize;
    let mut seen = HashSet::new();
    let mut per_entity = None;
    for i in 0..count {
        let it = parent
            .parallelise(&sub, i, count)
            .map_err(|e| TestCaseError::fail(e.to_string()))?;
        let tiles: Vec<Tile> = it.collect();
        prop_assert_eq!(*per_entity.get_or_insert(tiles.len()), tiles.len());
        for (k, t) in tiles.iter().enumerate() {
            prop_assert_eq!(t.size(), &sub);
            let pos = t.position();
            let mut cell = Vec::with_capacity(rank);
            for d in 0..rank {
                let rel = pos.values()[d] - origin.values()[d];
                prop_assert!(rel >= 0 && rel % sub.values()[d] == 0);
                cell.push(rel / sub.values()[d]);
            }
            let mut rank_ = 0;
            let mut stride = 1;
            for d in 0..rank {
                prop_assert!(cell[d] < grid[d]);
                rank_ += cell[d] * stride;
                stride *= grid[d];
            }
            prop_assert_eq!(rank_ as usize, i + k * count);
            prop_assert!(seen.insert(cell));
        }
    }
    prop_assert_eq!(seen.len(), cells);
    Ok(())
}

/// Extents of rank 1 to 4 and a shuffled copy of their names.
pub fn extents_case() -> impl Strategy<Value = (Vec<usize>, Vec<DimName>)> {
    (1usize..=4).prop_flat_map(|rank| {
        (
            prop::collection::vec(1usize..=6, rank),
            Just(names(rank)).prop_shuffle(),
        )
    })
}

/// Linearisation is a bijection onto `0..volume` and agrees with
/// `Σ c_d · Π_{d' < d} e_{d'}`, which is `n·M + m` in two dimensions.
pub fn check_linearise(ext: &[usize], coord_order: &[DimName]) -> Result<(), TestCaseError> {
    let d = names(ext.len());
    let extents = Coord::extents(&d.iter().copied().zip(ext.iter().copied()).collect::<Vec<_>>()).unwrap();
    let volume: usize = ext.iter().product();
    let mut hit = vec![false; volume];
    for r in 0..volume {
        let mut rem = r;
        let vals: Vec<isize> = ext
            .iter()
            .map(|&e| {
                let v = rem % e;
                rem /= e;
                v as isize
            })
            .collect();
        let pairs: Vec<(DimName, isize)> = coord_order
            .iter()
            .map(|n| (*n, vals[d.iter().position(|x| x == n).unwrap()]))
            .collect();
        let idx = linearise(&Coord::new(&pairs).unwrap(), &extents).map_err(|e| TestCaseError::fail(e.to_string()))?;
        let mut want = 0isize;
        for (k, &v) in vals.iter().enumerate().rev() {
            want = want * ext[k] as isize + v;
        }
        if ext.len() == 2 {
            prop_assert_eq!(want, vals[1] * ext[0] as isize + vals[0]);
        }
        prop_assert_eq!(idx, want);
        prop_assert!((0..volume as isize).contains(&idx));
        prop_assert!(!hit[idx as usize]);
        hit[idx as usize] = true;
    }
    prop_assert!(hit.iter().all(|&h| h));
    Ok(())
}

/// A tile and two displacements over its dimensions.
pub fn translate_case() -> impl Strategy<Value = (Tile, Vec<isize>, Vec<isize>)> {
    tile().prop_flat_map(|t| {
        let r = t.rank();
        (
            Just(t),
            prop::collection::vec(-100isize..100, r),
            prop::collection::vec(-100isize..100, r),
        )
    })
}

/// Translating by `u` then `v` equals translating by `u + v`, and only the
/// base moves.
pub fn check_translate(t: &Tile, u: &[isize], v: &[isize]) -> Result<(), TestCaseError> {
    let d = t.dims();
    let (cu, cv) = (coord(d.as_slice(), u), coord(d.as_slice(), v));
    let sum: Vec<isize> = u.iter().zip(v).map(|(a, b)| a + b).collect();
    let twice = translate(&translate(t, &cu).unwrap(), &cv).unwrap();
    let once = translate(t, &coord(d.as_slice(), &sum)).unwrap();
    prop_assert_eq!(twice, once);
    prop_assert_eq!(once.offset(), t.offset());
    prop_assert_eq!(once.size(), t.size());
    for (k, s) in sum.iter().enumerate().take(t.rank()) {
        prop_assert_eq!(once.base().values()[k], t.base().values()[k] + s);
    }
    Ok(())
}

/// A tile and a non-empty subset of its dimensions in random order.
pub fn project_case() -> impl Strategy<Value = (Tile, Vec<DimName>)> {
    tile().prop_flat_map(|t| {
        let all = t.dims().as_slice().to_vec();
        let n = all.len();
        (Just(t), Just(all).prop_shuffle(), 1..=n).prop_map(|(t, order, keep)| (t, order[..keep].to_vec()))
    })
}

/// Projection is idempotent, keeps per-dimension components, and projecting
/// onto all dimensions in order is the identity.
pub fn check_project(t: &Tile, keep: &[DimName]) -> Result<(), TestCaseError> {
    let p = project(t, keep).unwrap();
    prop_assert_eq!(project(&p, keep).unwrap(), p);
    for (j, n) in keep.iter().enumerate() {
        let i = t.dims().position(*n).unwrap();
        prop_assert_eq!(p.base().values()[j], t.base().values()[i]);
        prop_assert_eq!(p.offset().values()[j], t.offset().values()[i]);
        prop_assert_eq!(p.size().values()[j], t.size().values()[i]);
    }
    prop_assert_eq!(project(t, t.dims().as_slice()).unwrap(), *t);
    Ok(())
}
