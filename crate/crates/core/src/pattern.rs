//! Pixel genomes and their mirrored 16×16 meta-atom grids.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::{Error, Result};

/// Side of the independent sub-atom.
pub const SUB: usize = 8;
/// Side of the full mirrored meta-atom.
pub const GRID: usize = 2 * SUB;
/// Number of independent bits.
pub const GENOME_BITS: usize = SUB * SUB;

/// 8×8 independent pixels. Bit `(r, c)` lives at row-major index `r*8 + c`,
/// stored most-significant-bit first so that the hex form reads in row order.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Genome(u64);

impl Genome {
    pub const ZEROS: Genome = Genome(0);
    pub const ONES: Genome = Genome(u64::MAX);

    pub fn from_bits(bits: u64) -> Self {
        Genome(bits)
    }

    pub fn bits(self) -> u64 {
        self.0
    }

    fn mask(index: usize) -> u64 {
        debug_assert!(index < GENOME_BITS);
        1u64 << (GENOME_BITS - 1 - index)
    }

    pub fn get(self, row: usize, col: usize) -> bool {
        self.bit(row * SUB + col)
    }

    pub fn bit(self, index: usize) -> bool {
        self.0 & Self::mask(index) != 0
    }

    pub fn set(&mut self, row: usize, col: usize, value: bool) {
        let m = Self::mask(row * SUB + col);
        if value {
            self.0 |= m;
        } else {
            self.0 &= !m;
        }
    }

    pub fn popcount(self) -> u32 {
        self.0.count_ones()
    }

    /// 16 uppercase hex digits.
    pub fn pack(self) -> String {
        format!("{:016X}", self.0)
    }

    pub fn unpack(s: &str) -> Result<Self> {
        let err = |reason| Error::ParseGenome {
            input: s.to_string(),
            reason,
        };
        if s.len() != 16 {
            return Err(err("expected exactly 16 hex digits"));
        }
        if !s.bytes().all(|b| b.is_ascii_hexdigit()) {
            return Err(err("non-hex character"));
        }
        u64::from_str_radix(s, 16)
            .map(Genome)
            .map_err(|_| err("non-hex character"))
    }

    /// Bits encoded as `+1.0` (metal) / `-1.0` (vacuum) in index order.
    pub fn signed_inputs(self, out: &mut [f64]) {
        for (i, o) in out.iter_mut().enumerate().take(GENOME_BITS) {
            *o = if self.bit(i) { 1.0 } else { -1.0 };
        }
    }
}

impl fmt::Display for Genome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:016X}", self.0)
    }
}

impl fmt::Debug for Genome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Genome({:016X})", self.0)
    }
}

impl FromStr for Genome {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Genome::unpack(s)
    }
}

impl Serialize for Genome {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.pack())
    }
}

impl<'de> Deserialize<'de> for Genome {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        Genome::unpack(&s).map_err(serde::de::Error::custom)
    }
}

/// 16×16 metal (`true`) / vacuum (`false`) cells, indexed `[row][col]`.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub struct PixelGrid {
    pub cells: [[bool; GRID]; GRID],
}

impl PixelGrid {
    pub fn empty() -> Self {
        PixelGrid {
            cells: [[false; GRID]; GRID],
        }
    }

    pub fn get(&self, row: usize, col: usize) -> bool {
        self.cells[row][col]
    }

    pub fn metal_count(&self) -> usize {
        self.cells.iter().flatten().filter(|&&c| c).count()
    }

    /// Invariant under reflection about both central lines.
    pub fn is_mirror_symmetric(&self) -> bool {
        (0..GRID).all(|r| {
            (0..GRID).all(|c| {
                let v = self.cells[r][c];
                v == self.cells[r][GRID - 1 - c] && v == self.cells[GRID - 1 - r][c]
            })
        })
    }

    /// Plain PBM (P1), metal = 1.
    pub fn render_pbm(&self) -> String {
        let mut out = String::with_capacity(16 + GRID * GRID * 2);
        out.push_str(&format!("P1\n{GRID} {GRID}\n"));
        for row in &self.cells {
            let line: Vec<&str> = row.iter().map(|&c| if c { "1" } else { "0" }).collect();
            out.push_str(&line.join(" "));
            out.push('\n');
        }
        out
    }
}

/// Copies each sub-atom bit into its four mirror positions.
pub fn expand_genome(g: Genome) -> PixelGrid {
    let mut grid = PixelGrid::empty();
    for r in 0..SUB {
        for c in 0..SUB {
            if g.get(r, c) {
                let (rr, cc) = (GRID - 1 - r, GRID - 1 - c);
                grid.cells[r][c] = true;
                grid.cells[r][cc] = true;
                grid.cells[rr][c] = true;
                grid.cells[rr][cc] = true;
            }
        }
    }
    grid
}

pub fn render_pbm(grid: &PixelGrid) -> String {
    grid.render_pbm()
}

/// Physical dimensions of the meta-atom, lengths in metres.
///
/// The gap and lead dimensions are sub-pixel and are not rasterised into the
/// grid; the circuit oracle accounts for them as fixed elements. The loss
/// tangent is carried as metadata only.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GeometryMeta {
    pub period: f64,
    pub pixel_side: f64,
    pub pixel_pitch: f64,
    pub substrate_height: f64,
    pub eps_r: f64,
    pub loss_tangent: f64,
    pub gap: f64,
    pub lead_width: f64,
    pub lead_length: f64,
    pub center_freq: f64,
}

impl Default for GeometryMeta {
    fn default() -> Self {
        GeometryMeta {
            period: 25.8e-3,
            pixel_side: 1.5e-3,
            pixel_pitch: 1.375e-3,
            substrate_height: 1.52e-3,
            eps_r: 3.5,
            loss_tangent: 0.0018,
            gap: 0.3e-3,
            lead_width: 0.7e-3,
            lead_length: 11.125e-3,
            center_freq: 5.8e9,
        }
    }
}

impl GeometryMeta {
    pub fn validate(&self) -> Result<()> {
        let all = [
            self.period,
            self.pixel_side,
            self.pixel_pitch,
            self.substrate_height,
            self.eps_r,
            self.gap,
            self.lead_width,
            self.lead_length,
            self.center_freq,
        ];
        if all.iter().all(|v| *v > 0.0 && v.is_finite()) && self.loss_tangent >= 0.0 {
            Ok(())
        } else {
            Err(Error::InvalidArgument(format!(
                "geometry values must be positive: {self:?}"
            )))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn body_ones(pbm: &str) -> usize {
        pbm.lines().skip(2).flat_map(|l| l.split(' ')).filter(|t| *t == "1").count()
    }

    #[test]
    fn expand_constant_genomes() {
        assert_eq!(expand_genome(Genome::ZEROS).metal_count(), 0);
        assert_eq!(expand_genome(Genome::ONES).metal_count(), 256);
    }

    #[test]
    fn expand_single_corner_bit() {
        let mut g = Genome::ZEROS;
        g.set(0, 0, true);
        let grid = expand_genome(g);
        let metal: Vec<(usize, usize)> = (0..GRID)
            .flat_map(|r| (0..GRID).map(move |c| (r, c)))
            .filter(|&(r, c)| grid.get(r, c))
            .collect();
        assert_eq!(metal, vec![(0, 0), (0, 15), (15, 0), (15, 15)]);
    }

    #[test]
    fn pack_examples() {
        assert_eq!(Genome::ZEROS.pack(), "0000000000000000");
        assert_eq!(Genome::ONES.pack(), "FFFFFFFFFFFFFFFF");
        let mut g = Genome::ZEROS;
        g.set(0, 0, true);
        assert_eq!(g.pack(), "8000000000000000");
        let mut g = Genome::ZEROS;
        g.set(7, 7, true);
        assert_eq!(g.pack(), "0000000000000001");
    }

    #[test]
    fn unpack_rejects_malformed() {
        assert!(Genome::unpack("").is_err());
        assert!(Genome::unpack("000000000000000").is_err());
        assert!(Genome::unpack("00000000000000000").is_err());
        assert!(Genome::unpack("000000000000000G").is_err());
        assert!(Genome::unpack("+00000000000000F").is_err());
        assert_eq!(Genome::unpack("ffffffffffffffff").unwrap(), Genome::ONES);
    }

    #[test]
    fn pbm_examples() {
        let z = expand_genome(Genome::ZEROS).render_pbm();
        assert!(z.starts_with("P1\n16 16\n"));
        assert_eq!(body_ones(&z), 0);
        assert_eq!(z.lines().skip(2).flat_map(|l| l.split(' ')).count(), 256);
        assert_eq!(body_ones(&expand_genome(Genome::ONES).render_pbm()), 256);
        let mut g = Genome::ZEROS;
        g.set(3, 5, true);
        assert_eq!(body_ones(&expand_genome(g).render_pbm()), 4);
    }

    #[test]
    fn signed_encoding() {
        let mut g = Genome::ZEROS;
        g.set(0, 1, true);
        let mut x = [0.0; 64];
        g.signed_inputs(&mut x);
        assert_eq!(x[0], -1.0);
        assert_eq!(x[1], 1.0);
        assert_eq!(x.iter().filter(|v| **v > 0.0).count(), 1);
    }

    #[test]
    fn serde_as_hex() {
        let g = Genome::from_bits(0x0123_4567_89AB_CDEF);
        let s = serde_json::to_string(&g).unwrap();
        assert_eq!(s, "\"0123456789ABCDEF\"");
        assert_eq!(serde_json::from_str::<Genome>(&s).unwrap(), g);
    }

    mod props {
        use super::super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn pack_unpack_bijection(bits in any::<u64>()) {
                let g = Genome::from_bits(bits);
                prop_assert_eq!(Genome::unpack(&g.pack()).unwrap(), g);
            }

            #[test]
            fn expansion_symmetric_and_four_fold(bits in any::<u64>()) {
                let g = Genome::from_bits(bits);
                let grid = expand_genome(g);
                prop_assert!(grid.is_mirror_symmetric());
                prop_assert_eq!(grid.metal_count(), 4 * g.popcount() as usize);
            }
        }
    }
}
