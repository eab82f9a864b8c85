use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::sync::atomic::{AtomicUsize, Ordering};

use rand::RngCore;
use rayon::prelude::*;

use super::determining::{determining_test, Evaluation};
use super::experiment::StructureConstants;
use super::weights::{check_epsilon, WeightProfile};
use crate::error::{Error, Result};
use crate::estimate::Measured;
use crate::poly::{sign, Ptf, Restriction};
use crate::rng::{splitmix64, Streams};
use crate::scalar::Scalar;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Branching {
    /// Every assignment of every block; leaf masses are exact.
    Exhaustive,
    /// Only the nodes visited by `paths` random points are built; leaf
    /// masses are visit frequencies.
    Sampled { paths: u64, seed: u64 },
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DecomposeConfig {
    pub constants: StructureConstants,
    pub branching: Branching,
    /// Maximum number of nodes before the build aborts.
    pub node_budget: usize,
    pub evaluation: Evaluation,
    /// Overrides the default depth cap `t`.
    pub depth_cap: Option<usize>,
}

impl Default for DecomposeConfig {
    fn default() -> Self {
        Self {
            constants: StructureConstants::default(),
            branching: Branching::Exhaustive,
            node_budget: 1 << 20,
            evaluation: Evaluation::Exact,
            depth_cap: None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Classification {
    /// The restricted polynomial is `aε`-regular; `epsilon_out` is the
    /// smallest regularity parameter it satisfies.
    Regular { epsilon_out: f64 },
    /// The restriction is `bε`-determining with majority value `b`.
    Determined { b: i8, bias: Measured },
    /// Neither, at the depth cap.
    Capped,
    /// Split further on `block`.
    Internal,
}

impl Classification {
    pub fn name(&self) -> &'static str {
        match self {
            Self::Regular { .. } => "regular",
            Self::Determined { .. } => "determined",
            Self::Capped => "capped",
            Self::Internal => "internal",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct DecompositionNode {
    pub restriction: Restriction,
    pub depth: usize,
    pub classification: Classification,
    /// Variables restricted by the children, heaviest first.
    pub block: Vec<usize>,
    /// Keyed by assignment bits: bit `k` set means `block[k] = +1`.
    pub children: BTreeMap<u64, DecompositionNode>,
    /// Probability mass of the points reaching this node.
    pub mass: f64,
}

impl DecompositionNode {
    pub fn is_leaf(&self) -> bool {
        self.classification != Classification::Internal
    }

    fn visit<'a>(&'a self, out: &mut Vec<&'a DecompositionNode>) {
        out.push(self);
        for child in self.children.values() {
            child.visit(out);
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct LeafMasses {
    pub regular: f64,
    pub determined: f64,
    pub capped: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct DecompositionTree {
    pub root: DecompositionNode,
    pub epsilon: f64,
    pub branching: Branching,
    /// Block-size limit `L`.
    pub block_limit: usize,
    /// Depth cap `t`.
    pub depth_limit: usize,
}

impl DecompositionTree {
    /// Nodes in depth-first order, children by assignment bits.
    pub fn nodes(&self) -> Vec<&DecompositionNode> {
        let mut out = Vec::new();
        self.root.visit(&mut out);
        out
    }

    pub fn len(&self) -> usize {
        self.nodes().len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn max_depth(&self) -> usize {
        self.nodes().iter().map(|n| n.depth).max().unwrap_or(0)
    }

    pub fn leaf_masses(&self) -> LeafMasses {
        let mut m = LeafMasses::default();
        for node in self.nodes() {
            match node.classification {
                Classification::Regular { .. } => m.regular += node.mass,
                Classification::Determined { .. } => m.determined += node.mass,
                Classification::Capped => m.capped += node.mass,
                Classification::Internal => {}
            }
        }
        m
    }

    /// One line per node: `<restriction> <class> <epsilon_out|bias|-> <block size>`.
    pub fn export(&self) -> String {
        let mut s = String::new();
        for node in self.nodes() {
            let value = match node.classification {
                Classification::Regular { epsilon_out } => format!("{epsilon_out:.6e}"),
                Classification::Determined { bias, .. } => format!("{:.6e}", bias.value()),
                _ => "-".to_string(),
            };
            let class = match node.classification {
                Classification::Determined { b, .. } => format!("determined({b:+})"),
                c => c.name().to_string(),
            };
            writeln!(s, "{} {} {} {}", node.restriction.label(), class, value, node.block.len())
                .expect("string write");
        }
        s
    }

    pub const CSV_HEADER: &'static str = "epsilon,depth,regular_mass,determined_mass,capped_mass";

    pub fn csv_row(&self) -> String {
        let m = self.leaf_masses();
        format!("{},{},{},{},{}", self.epsilon, self.max_depth(), m.regular, m.determined, m.capped)
    }
}

struct Builder<'a, T: Scalar> {
    f: &'a Ptf<T>,
    epsilon: f64,
    cfg: &'a DecomposeConfig,
    block_limit: usize,
    depth_limit: usize,
    nodes: AtomicUsize,
}

fn restriction_seed(base: u64, r: &Restriction) -> u64 {
    r.iter().fold(splitmix64(base), |h, (v, s)| splitmix64(h ^ ((v as u64) << 1 | (s > 0) as u64)))
}

impl<T: Scalar> Builder<'_, T> {
    fn new_node(&self, restriction: Restriction, depth: usize, mass: f64) -> Result<DecompositionNode> {
        if self.nodes.fetch_add(1, Ordering::Relaxed) >= self.cfg.node_budget {
            return Err(Error::Budget(format!(
                "decomposition exceeds {} nodes",
                self.cfg.node_budget
            )));
        }
        let (classification, block) = self.classify(&restriction, depth)?;
        Ok(DecompositionNode { restriction, depth, classification, block, children: BTreeMap::new(), mass })
    }

    fn classify(&self, r: &Restriction, depth: usize) -> Result<(Classification, Vec<usize>)> {
        let q = self.f.poly.restrict(r)?;
        if q.is_constant() {
            let b = sign(q.constant_term() - self.f.theta);
            return Ok((Classification::Determined { b, bias: Measured::Exact(0.0) }, Vec::new()));
        }
        let profile = WeightProfile::new(&q)?;
        let c = &self.cfg.constants;
        if profile.is_regular(c.a * self.epsilon)? {
            return Ok((Classification::Regular { epsilon_out: profile.regularity() }, Vec::new()));
        }
        let seed = restriction_seed(self.seed(), r);
        let det = determining_test(self.f, r, c.b * self.epsilon, &self.cfg.evaluation.reseeded(seed))?;
        if det.is_determining() {
            return Ok((Classification::Determined { b: det.b, bias: det.bias }, Vec::new()));
        }
        if depth >= self.depth_limit {
            return Ok((Classification::Capped, Vec::new()));
        }
        let k = profile.critical_index(self.epsilon)?;
        let m = k.min(self.block_limit).max(1);
        Ok((Classification::Internal, profile.top(m).to_vec()))
    }

    fn seed(&self) -> u64 {
        match self.cfg.branching {
            Branching::Sampled { seed, .. } => seed,
            Branching::Exhaustive => match self.cfg.evaluation {
                Evaluation::Sampled(mc) | Evaluation::Auto { mc, .. } => mc.seed,
                Evaluation::Exact => 0,
            },
        }
    }

    fn child_restriction(parent: &DecompositionNode, bits: u64) -> Restriction {
        let mut r = parent.restriction.clone();
        for (k, &v) in parent.block.iter().enumerate() {
            r.assign(v, if (bits >> k) & 1 == 1 { 1 } else { -1 }).expect("±1");
        }
        r
    }

    fn expand_all(&self, node: &mut DecompositionNode) -> Result<()> {
        if node.is_leaf() {
            return Ok(());
        }
        let m = node.block.len();
        if m >= 63 || (1usize << m) > self.cfg.node_budget {
            return Err(Error::Budget(format!("block of {m} variables exceeds the node budget")));
        }
        let count = 1u64 << m;
        let mass = node.mass / count as f64;
        let children: Result<Vec<(u64, DecompositionNode)>> = (0..count)
            .into_par_iter()
            .map(|bits| {
                let mut child =
                    self.new_node(Self::child_restriction(node, bits), node.depth + 1, mass)?;
                self.expand_all(&mut child)?;
                Ok((bits, child))
            })
            .collect();
        node.children = children?.into_iter().collect();
        Ok(())
    }

    fn walk(&self, node: &mut DecompositionNode, rng: &mut impl RngCore) -> Result<()> {
        node.mass += 1.0;
        if node.is_leaf() {
            return Ok(());
        }
        let m = node.block.len();
        let bits = if m >= 64 { rng.next_u64() } else { rng.next_u64() & ((1u64 << m) - 1) };
        if !node.children.contains_key(&bits) {
            let child = self.new_node(Self::child_restriction(node, bits), node.depth + 1, 0.0)?;
            node.children.insert(bits, child);
        }
        self.walk(node.children.get_mut(&bits).expect("inserted"), rng)
    }
}

fn scale_mass(node: &mut DecompositionNode, s: f64) {
    node.mass *= s;
    for child in node.children.values_mut() {
        scale_mass(child, s);
    }
}

/// Recursive decomposition of `f` into regular and nearly-constant pieces.
///
/// Each node restricts the top `min(K, L)` variables of its restricted
/// polynomial and is classified `Regular` (`aε`-regular), `Determined`
/// (`bε`-determining) or, at depth `t`, `Capped`.
pub fn decompose<T: Scalar>(f: &Ptf<T>, epsilon: f64, cfg: &DecomposeConfig) -> Result<DecompositionTree> {
    check_epsilon(epsilon)?;
    if !f.poly.is_multilinear() {
        return Err(Error::NotMultilinear);
    }
    let builder = Builder {
        f,
        epsilon,
        cfg,
        block_limit: cfg.constants.block_size(epsilon),
        depth_limit: cfg.depth_cap.unwrap_or_else(|| cfg.constants.depth_cap(epsilon)),
        nodes: AtomicUsize::new(0),
    };
    let root = match cfg.branching {
        Branching::Exhaustive => {
            let mut root = builder.new_node(Restriction::new(), 0, 1.0)?;
            builder.expand_all(&mut root)?;
            root
        }
        Branching::Sampled { paths, seed } => {
            if paths == 0 {
                return Err(crate::error::invalid("at least one sampled path is required"));
            }
            let mut root = builder.new_node(Restriction::new(), 0, 0.0)?;
            let streams = Streams::with_domain(seed, 0x6465_636f);
            for p in 0..paths {
                builder.walk(&mut root, &mut streams.stream(p))?;
            }
            scale_mass(&mut root, 1.0 / paths as f64);
            root
        }
    };
    Ok(DecompositionTree {
        root,
        epsilon,
        branching: cfg.branching,
        block_limit: builder.block_limit,
        depth_limit: builder.depth_limit,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::{random_ptf, CoefficientModel};

    #[test]
    fn regular_root_is_a_leaf() {
        let f = Ptf::<f64>::majority(16);
        let tree = decompose(&f, 0.3, &DecomposeConfig::default()).unwrap();
        assert_eq!(tree.len(), 1);
        assert!(matches!(tree.root.classification, Classification::Regular { .. }));
    }

    #[test]
    fn dictator_splits_once() {
        let f = Ptf::<f64>::dictator(1, 0);
        let tree = decompose(&f, 0.3, &DecomposeConfig::default()).unwrap();
        assert_eq!(tree.root.block, vec![0]);
        assert_eq!(tree.root.children.len(), 2);
        for (bits, child) in &tree.root.children {
            let b = if *bits == 1 { 1 } else { -1 };
            assert_eq!(child.classification, Classification::Determined { b, bias: Measured::Exact(0.0) });
            assert_eq!(child.mass, 0.5);
        }
        let m = tree.leaf_masses();
        assert_eq!(m.determined, 1.0);
        let text = tree.export();
        assert_eq!(text.lines().next(), Some("- internal - 1"));
        assert!(text.contains("x0=+1 determined(+1) 0.000000e0 0"));
    }

    #[test]
    fn masses_sum_to_one() {
        let f = random_ptf::<f64>(8, 2, CoefficientModel::UnitGaussian, 9).unwrap();
        let tree = decompose(&f, 0.3, &DecomposeConfig::default()).unwrap();
        let m = tree.leaf_masses();
        assert!((m.regular + m.determined + m.capped - 1.0).abs() < 1e-12);
        for node in tree.nodes() {
            assert!(node.block.len() <= tree.block_limit);
            assert!(node.depth <= tree.depth_limit);
        }
    }

    #[test]
    fn sampled_branching_is_deterministic() {
        let f = random_ptf::<f64>(10, 2, CoefficientModel::UnitGaussian, 2).unwrap();
        let cfg = DecomposeConfig {
            branching: Branching::Sampled { paths: 300, seed: 4 },
            ..DecomposeConfig::default()
        };
        let a = decompose(&f, 0.3, &cfg).unwrap();
        let b = decompose(&f, 0.3, &cfg).unwrap();
        assert_eq!(a, b);
        let m = a.leaf_masses();
        assert!((m.regular + m.determined + m.capped - 1.0).abs() < 1e-12);
    }

    #[test]
    fn budget_is_enforced() {
        let f = random_ptf::<f64>(10, 2, CoefficientModel::UnitGaussian, 2).unwrap();
        let cfg = DecomposeConfig { node_budget: 1, ..DecomposeConfig::default() };
        let res = decompose(&f, 0.3, &cfg);
        assert!(matches!(res, Err(Error::Budget(_))) || res.unwrap().len() == 1);
    }
}
