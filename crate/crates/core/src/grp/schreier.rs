//! Deterministic Schreier-Sims on permutation groups given by generators.
//!
//! Permutations are image vectors; products are read left to right, so
//! `mul(p, q)` applies `p` first.

pub type Perm = Vec<u32>;

fn mul(p: &[u32], q: &[u32]) -> Perm {
    p.iter().map(|&x| q[x as usize]).collect()
}

fn inverse(p: &[u32]) -> Perm {
    let mut out = vec![0u32; p.len()];
    for (i, &x) in p.iter().enumerate() {
        out[x as usize] = i as u32;
    }
    out
}

fn is_identity(p: &[u32]) -> bool {
    p.iter().enumerate().all(|(i, &x)| i as u32 == x)
}

struct Level {
    base: u32,
    gens: Vec<Perm>,
    inv_gens: Vec<Perm>,
    orbit: Vec<u32>,
    /// For each domain point: `-1` not in orbit, `-2` the base point,
    /// otherwise the index of the generator whose edge reached it.
    edge: Vec<i32>,
}

impl Level {
    fn new(base: u32, degree: usize) -> Level {
        let mut lvl = Level {
            base,
            gens: Vec::new(),
            inv_gens: Vec::new(),
            orbit: Vec::new(),
            edge: vec![-1; degree],
        };
        lvl.rebuild_orbit();
        lvl
    }

    fn add_gen(&mut self, g: Perm) {
        self.inv_gens.push(inverse(&g));
        self.gens.push(g);
        self.rebuild_orbit();
    }

    fn rebuild_orbit(&mut self) {
        self.edge.iter_mut().for_each(|e| *e = -1);
        self.edge[self.base as usize] = -2;
        self.orbit.clear();
        self.orbit.push(self.base);
        let mut i = 0;
        while i < self.orbit.len() {
            let pt = self.orbit[i];
            for (k, g) in self.gens.iter().enumerate() {
                let img = g[pt as usize];
                if self.edge[img as usize] == -1 {
                    self.edge[img as usize] = k as i32;
                    self.orbit.push(img);
                }
            }
            i += 1;
        }
    }

    /// Coset representative mapping the base point to `pt`.
    fn transversal(&self, pt: u32) -> Perm {
        let degree = self.edge.len();
        let mut word = Vec::new();
        let mut cur = pt;
        while self.edge[cur as usize] != -2 {
            let k = self.edge[cur as usize] as usize;
            word.push(k);
            cur = self.inv_gens[k][cur as usize];
        }
        let mut u: Perm = (0..degree as u32).collect();
        for &k in word.iter().rev() {
            u = mul(&u, &self.gens[k]);
        }
        u
    }
}

/// A base and strong generating set.
pub struct StabilizerChain {
    degree: usize,
    levels: Vec<Level>,
}

impl StabilizerChain {
    pub fn new(degree: usize, generators: &[Perm]) -> StabilizerChain {
        let mut chain = StabilizerChain {
            degree,
            levels: Vec::new(),
        };
        let gens: Vec<Perm> = generators.iter().filter(|g| !is_identity(g)).cloned().collect();
        for g in &gens {
            if chain.levels.iter().all(|l| g[l.base as usize] == l.base) {
                let moved = g.iter().enumerate().find(|(i, &x)| *i as u32 != x).unwrap().0;
                chain.levels.push(Level::new(moved as u32, degree));
            }
        }
        for g in &gens {
            // generators belong to every level whose earlier base points they fix
            for j in 0..chain.levels.len() {
                chain.levels[j].add_gen(g.clone());
                if g[chain.levels[j].base as usize] != chain.levels[j].base {
                    break;
                }
            }
        }
        chain.complete();
        chain
    }

    /// Sift `g` starting at `from`; returns the residue and the level where
    /// sifting stopped (`levels.len()` if it passed every level).
    fn sift(&self, mut g: Perm, from: usize) -> (Perm, usize) {
        for j in from..self.levels.len() {
            let lvl = &self.levels[j];
            let img = g[lvl.base as usize];
            if lvl.edge[img as usize] == -1 {
                return (g, j);
            }
            g = mul(&g, &inverse(&lvl.transversal(img)));
        }
        let depth = self.levels.len();
        (g, depth)
    }

    fn complete(&mut self) {
        if self.levels.is_empty() {
            return;
        }
        let mut i = self.levels.len() - 1;
        'outer: loop {
            let orbit = self.levels[i].orbit.clone();
            let ngens = self.levels[i].gens.len();
            for &beta in &orbit {
                let u_beta = self.levels[i].transversal(beta);
                for s in 0..ngens {
                    let s_perm = &self.levels[i].gens[s];
                    let image = s_perm[beta as usize];
                    let y = mul(&mul(&u_beta, s_perm), &inverse(&self.levels[i].transversal(image)));
                    if is_identity(&y) {
                        continue;
                    }
                    let (h, j) = self.sift(y, i + 1);
                    let depth = self.levels.len();
                    if j < depth || !is_identity(&h) {
                        if j == depth {
                            let moved = h.iter().enumerate().find(|(a, &b)| *a as u32 != b).unwrap().0;
                            self.levels.push(Level::new(moved as u32, self.degree));
                        }
                        for l in i + 1..=j {
                            self.levels[l].add_gen(h.clone());
                        }
                        i = j;
                        continue 'outer;
                    }
                }
            }
            if i == 0 {
                break;
            }
            i -= 1;
        }
    }

    pub fn order(&self) -> u128 {
        self.levels.iter().map(|l| l.orbit.len() as u128).product()
    }

    pub fn base(&self) -> Vec<u32> {
        self.levels.iter().map(|l| l.base).collect()
    }

    pub fn contains(&self, g: &[u32]) -> bool {
        let (h, j) = self.sift(g.to_vec(), 0);
        j == self.levels.len() && is_identity(&h)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cycle(n: usize, pts: &[u32]) -> Perm {
        let mut p: Perm = (0..n as u32).collect();
        for w in 0..pts.len() {
            p[pts[w] as usize] = pts[(w + 1) % pts.len()];
        }
        p
    }

    #[test]
    fn symmetric_and_alternating() {
        for n in 2..8usize {
            let all: Vec<u32> = (0..n as u32).collect();
            let s = StabilizerChain::new(n, &[cycle(n, &[0, 1]), cycle(n, &all)]);
            assert_eq!(s.order(), (1..=n as u128).product());
        }
        let a5 = StabilizerChain::new(5, &[cycle(5, &[0, 1, 2]), cycle(5, &[0, 1, 2, 3, 4])]);
        assert_eq!(a5.order(), 60);
        assert!(a5.contains(&cycle(5, &[2, 3, 4])));
        assert!(!a5.contains(&cycle(5, &[0, 1])));
    }

    #[test]
    fn trivial_and_cyclic() {
        let id: Perm = (0..6).collect();
        assert_eq!(StabilizerChain::new(6, &[id]).order(), 1);
        assert_eq!(StabilizerChain::new(6, &[cycle(6, &[0, 1, 2, 3, 4, 5])]).order(), 6);
        let c = StabilizerChain::new(6, &[cycle(6, &[0, 1]), cycle(6, &[2, 3, 4])]);
        assert_eq!(c.order(), 6);
    }
}
