use crate::components::stream::{store_stream, StreamBuf};
use crate::components::transform::{map_planes, Transform};
use crate::element::{ConvertTo, Element};
use crate::error::{Error, Result};
use crate::layout::{Layout, Sink, Source};
use crate::operator::{element_at, set_element};
use crate::tiling::{DimName, Tile};

/// Which index of the output a bias vector follows.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum BiasAxis {
    /// `D[i, j] += bias[j]`.
    #[default]
    Columns,
    /// `D[i, j] += bias[i]`.
    Rows,
}

/// The final block-level copy from scratch to global memory.
#[derive(Debug, Clone, Default, PartialEq)]
pub enum Epilogue<T> {
    #[default]
    DefaultCopy,
    Bias {
        values: Vec<T>,
        axis: BiasAxis,
    },
}

impl<T: Element> Epilogue<T> {
    /// Per-column bias.
    pub fn bias(values: Vec<T>) -> Self {
        Epilogue::Bias {
            values,
            axis: BiasAxis::Columns,
        }
    }

    pub fn validate(&self, m: usize, n: usize) -> Result<()> {
        if let Epilogue::Bias { values, axis } = self {
            let expected = match axis {
                BiasAxis::Columns => n,
                BiasAxis::Rows => m,
            };
            if values.len() != expected {
                return Err(Error::BiasLength {
                    expected,
                    actual: values.len(),
                });
            }
        }
        Ok(())
    }
}

/// Scratch reads and global writes performed by an epilogue.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct EpilogueStats {
    pub scratch_loads: u64,
    pub global_stores: u64,
}

fn start_of(tile: &Tile, dim: DimName) -> usize {
    tile.dims().position(dim).map_or(0, |i| tile.start(i) as usize)
}

#[allow(clippy::too_many_arguments)]
pub(crate) fn run_epilogue_into<S, T, Src, Dst>(
    epilogue: &Epilogue<T>,
    scratch_layout: &Layout,
    scratch: &Src,
    global_layout: &Layout,
    global: &mut Dst,
    block: &Tile,
    transform: &Transform<T>,
    entities: usize,
    buf: &mut StreamBuf<S::Real, T::Real>,
) -> Result<EpilogueStats>
where
    S: Element,
    T: ConvertTo<S>,
    Src: Source<T::Real> + ?Sized,
    Dst: Sink<S::Real> + ?Sized,
{
    let m0 = start_of(block, DimName::M);
    let n0 = start_of(block, DimName::N);
    let moved = match epilogue {
        Epilogue::DefaultCopy => store_stream(
            scratch_layout,
            scratch,
            global_layout,
            global,
            block,
            transform,
            entities,
            buf,
            |_, _| {},
        )?,
        Epilogue::Bias { values, axis } => store_stream(
            scratch_layout,
            scratch,
            global_layout,
            global,
            block,
            transform,
            entities,
            buf,
            |col, planes| {
                let rows = col.extent(0);
                let (i0, j) = (col.start(0) as usize, col.start(1) as usize);
                match axis {
                    BiasAxis::Columns => {
                        let b = values[n0 + j];
                        map_planes::<T>(planes, rows, |x| x + b);
                    }
                    BiasAxis::Rows => {
                        let bias = &values[m0 + i0..m0 + i0 + rows];
                        for (e, &b) in bias.iter().enumerate() {
                            let x = element_at::<T>(planes, rows, e);
                            set_element::<T>(planes, rows, e, x + b);
                        }
                    }
                }
            },
        )?,
    };
    Ok(EpilogueStats {
        scratch_loads: moved.loads,
        global_stores: moved.stores,
    })
}

/// Copies the block accumulator tile from scratch to `block` (absolute
/// `(M, N)`) in global memory: bias, then `transform`, then narrowing to `S`.
#[allow(clippy::too_many_arguments)]
pub fn run_epilogue<S: Element, T: ConvertTo<S>>(
    epilogue: &Epilogue<T>,
    scratch_layout: &Layout,
    scratch: &[T::Real],
    global_layout: &Layout,
    global: &mut [S::Real],
    block: &Tile,
    transform: &Transform<T>,
    entities: usize,
) -> Result<EpilogueStats> {
    if let Some((m, n)) = global_layout.matrix_extents() {
        epilogue.validate(m, n)?;
    }
    let mut buf = StreamBuf::new(block.extent(0), T::LANES);
    run_epilogue_into::<S, T, _, _>(
        epilogue,
        scratch_layout,
        scratch,
        global_layout,
        global,
        block,
        transform,
        entities,
        &mut buf,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::layout::LayoutKind;

    fn block(m0: isize, n0: isize, bm: usize, bn: usize) -> Tile {
        Tile::with_extents(&[(DimName::M, bm), (DimName::N, bn)])
            .unwrap()
            .shifted(0, m0)
            .shifted(1, n0)
    }

    #[test]
    fn default_copy_places_block_and_narrows() {
        let scratch_l = Layout::matrix::<f64>(LayoutKind::ColMajor, 2, 2).unwrap();
        let global_l = Layout::matrix::<f32>(LayoutKind::ColMajor, 4, 4).unwrap();
        let scratch = [1.0f64, 2.0, 3.0, 0.1];
        let mut global = [0.0f32; 16];
        let s = run_epilogue::<f32, f64>(
            &Epilogue::DefaultCopy,
            &scratch_l,
            &scratch,
            &global_l,
            &mut global,
            &block(2, 1, 2, 2),
            &Transform::Identity,
            1,
        )
        .unwrap();
        assert_eq!(
            s,
            EpilogueStats {
                scratch_loads: 4,
                global_stores: 4
            }
        );
        assert_eq!(global[6], 1.0);
        assert_eq!(global[7], 2.0);
        assert_eq!(global[10], 3.0);
        assert_eq!(global[11], 0.1f32);
    }

    #[test]
    fn bias_precedes_transform() {
        let l = Layout::matrix::<f64>(LayoutKind::ColMajor, 2, 2).unwrap();
        let g = Layout::matrix::<f64>(LayoutKind::ColMajor, 2, 4).unwrap();
        let scratch = [-1.0, 1.0, -3.0, 3.0];
        let mut out = [9.0; 8];
        let epi = Epilogue::bias(vec![0.0, 0.0, 2.0, -1.0]);
        run_epilogue::<f64, f64>(
            &epi,
            &l,
            &scratch,
            &g,
            &mut out,
            &block(0, 2, 2, 2),
            &Transform::Relu,
            2,
        )
        .unwrap();
        assert_eq!(out, [9.0, 9.0, 9.0, 9.0, 1.0, 3.0, 0.0, 2.0]);

        let rows = Epilogue::Bias {
            values: vec![10.0, 20.0],
            axis: BiasAxis::Rows,
        };
        run_epilogue::<f64, f64>(
            &rows,
            &l,
            &scratch,
            &g,
            &mut out,
            &block(0, 0, 2, 2),
            &Transform::Identity,
            1,
        )
        .unwrap();
        assert_eq!(&out[..4], &[9.0, 21.0, 7.0, 23.0]);
    }

    #[test]
    fn bias_length_is_checked() {
        let e = Epilogue::bias(vec![1.0f32; 3]);
        assert_eq!(e.validate(8, 4), Err(Error::BiasLength { expected: 4, actual: 3 }));
        assert!(e.validate(4, 3).is_ok());
    }
}
