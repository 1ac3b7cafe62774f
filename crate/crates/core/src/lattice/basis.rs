use super::{LatticeError, Sector};

pub const UP: usize = 0;
pub const DOWN: usize = 1;

/// Fock states of a fixed particle-number sector, as occupation bitmasks.
/// Mode index is `spin·L + x`; fermionic order follows the mode index.
#[derive(Debug, Clone, PartialEq)]
pub struct Basis {
    pub sites: usize,
    pub sector: Sector,
    states: Vec<u32>,
}

impl Basis {
    pub fn new(sites: usize, sector: Sector) -> Result<Self, LatticeError> {
        if !(2..=8).contains(&sites) {
            return Err(LatticeError::InvalidParams(format!(
                "L must lie in 2..=8 (got {sites})"
            )));
        }
        let (lo, hi) = (0u32, 1u32 << (2 * sites));
        let spin_mask = (1u32 << sites) - 1;
        let keep = |s: u32| match sector {
            Sector::Spin { n_up, n_dn } => {
                (s & spin_mask).count_ones() as usize == n_up && (s >> sites).count_ones() as usize == n_dn
            }
            Sector::Total { n } => s.count_ones() as usize == n,
        };
        let states: Vec<u32> = (lo..hi).filter(|&s| keep(s)).collect();
        if states.is_empty() {
            return Err(LatticeError::InvalidParams(format!(
                "empty sector {sector:?} for L = {sites}"
            )));
        }
        Ok(Self { sites, sector, states })
    }

    pub fn dim(&self) -> usize {
        self.states.len()
    }

    pub fn states(&self) -> &[u32] {
        &self.states
    }

    pub fn index(&self, state: u32) -> Option<usize> {
        self.states.binary_search(&state).ok()
    }

    pub fn mode(&self, x: usize, spin: usize) -> usize {
        spin * self.sites + x % self.sites
    }

    /// Site reached from `x` by `shift` steps around the ring.
    pub fn wrap(&self, x: usize, shift: isize) -> usize {
        (x as isize + shift).rem_euclid(self.sites as isize) as usize
    }

    /// Domain state: ↑ fermions on the leftmost sites, ↓ fermions on the rightmost.
    pub fn domain_state(&self) -> u32 {
        let (n_up, n_dn) = match self.sector {
            Sector::Spin { n_up, n_dn } => (n_up, n_dn),
            Sector::Total { n } => (n.div_ceil(2).min(self.sites), n - n.div_ceil(2).min(self.sites)),
        };
        let mut s = 0u32;
        for x in 0..n_up {
            s |= 1 << self.mode(x, UP);
        }
        for x in self.sites - n_dn..self.sites {
            s |= 1 << self.mode(x, DOWN);
        }
        s
    }
}

pub fn occupied(state: u32, mode: usize) -> bool {
    state >> mode & 1 == 1
}

/// c†_a c_b |state⟩ as (new state, fermionic sign), or None if it vanishes.
pub fn hop(state: u32, a: usize, b: usize) -> Option<(u32, f64)> {
    if !occupied(state, b) {
        return None;
    }
    let mid = state & !(1 << b);
    if occupied(mid, a) {
        return None;
    }
    let below = |s: u32, m: usize| (s & ((1u32 << m) - 1)).count_ones();
    let parity = below(state, b) + below(mid, a);
    let sign = if parity % 2 == 0 { 1.0 } else { -1.0 };
    Some((mid | 1 << a, sign))
}
