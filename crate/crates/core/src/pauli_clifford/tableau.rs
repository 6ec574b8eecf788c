use rand::Rng;

use crate::error::{check_len, Result};
use crate::pauli_clifford::{conjugate_pauli, CliffordCircuit, Gate, PauliString};

/// Heisenberg images `C X_j C†` and `C Z_j C†` of the generators.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct CliffordTableau {
    n: usize,
    x_images: Vec<PauliString>,
    z_images: Vec<PauliString>,
}

impl CliffordTableau {
    pub fn identity(n: usize) -> Self {
        CliffordTableau {
            n,
            x_images: (0..n).map(|j| PauliString::single(n, j, 'X')).collect(),
            z_images: (0..n).map(|j| PauliString::single(n, j, 'Z')).collect(),
        }
    }

    pub fn from_circuit(c: &CliffordCircuit) -> Self {
        let id = Self::identity(c.n());
        let conj = |p: &PauliString| conjugate_pauli(c, p).expect("sizes agree");
        CliffordTableau {
            n: c.n(),
            x_images: id.x_images.iter().map(conj).collect(),
            z_images: id.z_images.iter().map(conj).collect(),
        }
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn x_image(&self, j: usize) -> &PauliString {
        &self.x_images[j]
    }

    pub fn z_image(&self, j: usize) -> &PauliString {
        &self.z_images[j]
    }

    /// Images are Hermitian, `X_j`/`Z_j` images anticommute and every other
    /// pair commutes.
    pub fn is_symplectic(&self) -> bool {
        let all: Vec<&PauliString> = self.x_images.iter().chain(&self.z_images).collect();
        if !all.iter().all(|p| p.is_hermitian()) {
            return false;
        }
        for a in 0..2 * self.n {
            for b in (a + 1)..2 * self.n {
                let anti = b == a + self.n;
                if all[a].commutes_with(all[b]).expect("sizes agree") == anti {
                    return false;
                }
            }
        }
        true
    }

    /// `C p C†` assembled from the generator images.
    pub fn apply(&self, p: &PauliString) -> Result<PauliString> {
        check_len(self.n, p.n())?;
        let mut out = PauliString::identity(self.n);
        out.phase = p.phase;
        for j in 0..self.n {
            if p.x.get(j) {
                out = out.multiply(&self.x_images[j])?;
            }
            if p.z.get(j) {
                out = out.multiply(&self.z_images[j])?;
            }
        }
        Ok(out)
    }
}

/// Random gate word over `{H, P, CNOT}` with length drawn uniformly from
/// `L..=2L`, `L = 8k² + 12`. The length varies so that words of both
/// parities occur; a fixed length only reaches half the single-qubit group.
///
/// Not Haar-uniform over the Clifford group. Panics if `k > 6`.
pub fn random_clifford<R: Rng + ?Sized>(k: usize, rng: &mut R) -> CliffordCircuit {
    assert!((1..=6).contains(&k), "random_clifford supports 1 <= k <= 6");
    let base = 8 * k * k + 12;
    let len = rng.gen_range(base..=2 * base);
    let mut c = CliffordCircuit::new(k);
    for _ in 0..len {
        let choice = if k == 1 { rng.gen_range(0..2) } else { rng.gen_range(0..3) };
        let g = match choice {
            0 => Gate::H(rng.gen_range(0..k)),
            1 => Gate::P(rng.gen_range(0..k)),
            _ => {
                let a = rng.gen_range(0..k);
                let mut b = rng.gen_range(0..k - 1);
                if b >= a {
                    b += 1;
                }
                Gate::Cnot(a, b)
            }
        };
        c.push(g).expect("in-range gate");
    }
    c
}
