//! Labelled tensor networks of square operators.
//!
//! Every node is a `d^k x d^k` operator whose `k` input legs consume labels and
//! whose `k` output legs produce labels. A label produced by one node and
//! consumed by another is summed over; unmatched labels form the free
//! boundary. The contraction result is a matrix with rows indexed by
//! `free_outputs` and columns by `free_inputs`, both in list order.

use std::collections::HashMap;

use ndarray::{ArrayD, Ix2, IxDyn};
use num_complex::Complex64 as C64;

use super::dense::{checked_pow, DenseTensor};
use crate::error::{Error, Result};

/// Upper bound on the number of summed terms `brute_force_contract` accepts.
pub const BRUTE_FORCE_LIMIT: u128 = 1 << 30;

#[derive(Clone, Debug)]
pub struct Node {
    pub name: String,
    pub tensor: DenseTensor,
    pub inputs: Vec<String>,
    pub outputs: Vec<String>,
}

impl Node {
    pub fn new(
        name: impl Into<String>,
        tensor: DenseTensor,
        inputs: &[&str],
        outputs: &[&str],
    ) -> Self {
        Self {
            name: name.into(),
            tensor,
            inputs: inputs.iter().map(|s| s.to_string()).collect(),
            outputs: outputs.iter().map(|s| s.to_string()).collect(),
        }
    }
}

#[derive(Clone, Debug)]
pub struct WiringDiagram {
    pub d: usize,
    pub nodes: Vec<Node>,
    pub free_inputs: Vec<String>,
    pub free_outputs: Vec<String>,
    /// Identity wires `(input label, output label)`.
    pub deltas: Vec<(String, String)>,
}

fn diagram_err<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Diagram(msg.into()))
}

#[derive(Default)]
struct Usage {
    produced: usize,
    consumed: usize,
}

impl WiringDiagram {
    pub fn new(d: usize, free_inputs: &[&str], free_outputs: &[&str]) -> Self {
        Self {
            d,
            nodes: Vec::new(),
            free_inputs: free_inputs.iter().map(|s| s.to_string()).collect(),
            free_outputs: free_outputs.iter().map(|s| s.to_string()).collect(),
            deltas: Vec::new(),
        }
    }

    pub fn with_node(mut self, node: Node) -> Self {
        self.nodes.push(node);
        self
    }

    pub fn with_delta(mut self, input: &str, output: &str) -> Self {
        self.deltas.push((input.to_string(), output.to_string()));
        self
    }

    /// Labels summed over by the contraction, in first-appearance order.
    pub fn internal_labels(&self) -> Vec<String> {
        let mut seen = Vec::new();
        let consumers: Vec<&String> = self
            .nodes
            .iter()
            .flat_map(|n| n.inputs.iter())
            .chain(self.deltas.iter().map(|(i, _)| i))
            .collect();
        let producers = self
            .nodes
            .iter()
            .flat_map(|n| n.outputs.iter())
            .chain(self.deltas.iter().map(|(_, o)| o));
        for label in producers {
            if consumers.contains(&label) && !seen.contains(label) {
                seen.push(label.clone());
            }
        }
        seen
    }

    /// Diagram of a gate sequence on `n` sites. Gates apply in list order
    /// (first gate first); gate `k` acts on `sites` in leg order. Free legs
    /// are `i0..` and `o0..`.
    pub fn from_circuit(d: usize, n: usize, gates: &[(DenseTensor, Vec<usize>)]) -> Self {
        let inputs: Vec<String> = (0..n).map(|s| format!("i{s}")).collect();
        let outputs: Vec<String> = (0..n).map(|s| format!("o{s}")).collect();
        let mut last_gate = vec![None; n];
        for (k, (_, sites)) in gates.iter().enumerate() {
            for &s in sites {
                last_gate[s] = Some(k);
            }
        }
        let mut current = inputs.clone();
        let mut diagram = WiringDiagram {
            d,
            nodes: Vec::new(),
            free_inputs: inputs.clone(),
            free_outputs: outputs.clone(),
            deltas: Vec::new(),
        };
        for (k, (tensor, sites)) in gates.iter().enumerate() {
            let ins: Vec<String> = sites.iter().map(|&s| current[s].clone()).collect();
            let outs: Vec<String> = sites
                .iter()
                .map(|&s| {
                    if last_gate[s] == Some(k) {
                        outputs[s].clone()
                    } else {
                        format!("w{k}_{s}")
                    }
                })
                .collect();
            for (&s, l) in sites.iter().zip(&outs) {
                current[s] = l.clone();
            }
            diagram.nodes.push(Node {
                name: format!("G{k}"),
                tensor: tensor.clone(),
                inputs: ins,
                outputs: outs,
            });
        }
        for s in 0..n {
            if last_gate[s].is_none() {
                diagram.deltas.push((inputs[s].clone(), outputs[s].clone()));
            }
        }
        diagram
    }

    pub fn validate(&self) -> Result<()> {
        if self.d < 2 {
            return diagram_err(format!("local dimension {} < 2", self.d));
        }
        let mut usage: HashMap<&str, Usage> = HashMap::new();
        for node in &self.nodes {
            let k = node.inputs.len();
            if node.outputs.len() != k || k == 0 {
                return diagram_err(format!(
                    "node {} has {} inputs and {} outputs",
                    node.name,
                    k,
                    node.outputs.len()
                ));
            }
            let dim = checked_pow(self.d, k)?;
            if node.tensor.shape() != [dim, dim] {
                return diagram_err(format!(
                    "node {} tensor shape {:?} does not match {k} legs of dimension {}",
                    node.name,
                    node.tensor.shape(),
                    self.d
                ));
            }
            if node.inputs.iter().any(|l| node.outputs.contains(l)) {
                return diagram_err(format!("node {} wires a leg to itself", node.name));
            }
            for l in &node.inputs {
                usage.entry(l).or_default().consumed += 1;
            }
            for l in &node.outputs {
                usage.entry(l).or_default().produced += 1;
            }
        }
        for (i, o) in &self.deltas {
            if i == o {
                return diagram_err(format!("delta {i} -> {o} is a closed loop"));
            }
            usage.entry(i).or_default().consumed += 1;
            usage.entry(o).or_default().produced += 1;
        }
        for (list, name) in [
            (&self.free_inputs, "free input"),
            (&self.free_outputs, "free output"),
        ] {
            for (idx, l) in list.iter().enumerate() {
                if list[..idx].contains(l) {
                    return diagram_err(format!("{name} {l} listed twice"));
                }
            }
        }
        for (label, u) in &usage {
            if u.produced > 1 || u.consumed > 1 {
                return diagram_err(format!(
                    "label {label} is produced {} and consumed {} times",
                    u.produced, u.consumed
                ));
            }
            let free_in = self.free_inputs.iter().any(|l| l == label);
            let free_out = self.free_outputs.iter().any(|l| l == label);
            match (u.produced, u.consumed) {
                (1, 1) if free_in || free_out => {
                    return diagram_err(format!(
                        "internal label {label} is also on the free boundary"
                    ))
                }
                (1, 1) => {}
                (0, 1) if !free_in => {
                    return diagram_err(format!("label {label} is consumed but never produced"))
                }
                (1, 0) if !free_out => {
                    return diagram_err(format!("label {label} is produced but never consumed"))
                }
                (0, 1) | (1, 0) if free_in && free_out => {
                    return diagram_err(format!(
                        "label {label} is both a free input and a free output"
                    ))
                }
                (0, 1) if free_out => {
                    return diagram_err(format!("free output {label} is consumed"))
                }
                (1, 0) if free_in => return diagram_err(format!("free input {label} is produced")),
                _ => {}
            }
        }
        for l in self.free_inputs.iter().chain(&self.free_outputs) {
            if !usage.contains_key(l.as_str()) {
                return diagram_err(format!("free label {l} is not attached to any leg"));
            }
        }
        Ok(())
    }

    fn output_dims(&self) -> Result<(usize, usize)> {
        Ok((
            checked_pow(self.d, self.free_outputs.len())?,
            checked_pow(self.d, self.free_inputs.len())?,
        ))
    }
}

struct Labelled {
    data: ArrayD<C64>,
    labels: Vec<String>,
}

impl Labelled {
    fn scalar() -> Self {
        Self {
            data: ArrayD::from_elem(IxDyn(&[]), C64::new(1.0, 0.0)),
            labels: Vec::new(),
        }
    }

    fn from_operator(
        tensor: &DenseTensor,
        d: usize,
        inputs: &[String],
        outputs: &[String],
    ) -> Self {
        let legs = vec![d; inputs.len() + outputs.len()];
        let data = ArrayD::from_shape_vec(IxDyn(&legs), tensor.entries().to_vec())
            .expect("validated operator shape");
        Self {
            data,
            labels: outputs.iter().chain(inputs).cloned().collect(),
        }
    }

    /// Pairwise contraction over every label the two tensors share.
    fn contract(self, other: Labelled) -> Labelled {
        let shared: Vec<&String> = self
            .labels
            .iter()
            .filter(|l| other.labels.contains(l))
            .collect();
        let pos = |labels: &[String], l: &String| labels.iter().position(|x| x == l).unwrap();

        let free_a: Vec<usize> = (0..self.labels.len())
            .filter(|&i| !shared.contains(&&self.labels[i]))
            .collect();
        let free_b: Vec<usize> = (0..other.labels.len())
            .filter(|&i| !shared.contains(&&other.labels[i]))
            .collect();
        let shared_a: Vec<usize> = shared.iter().map(|l| pos(&self.labels, l)).collect();
        let shared_b: Vec<usize> = shared.iter().map(|l| pos(&other.labels, l)).collect();

        let dims_of = |data: &ArrayD<C64>, axes: &[usize]| {
            axes.iter().map(|&a| data.shape()[a]).collect::<Vec<_>>()
        };
        let dims_a = dims_of(&self.data, &free_a);
        let dims_b = dims_of(&other.data, &free_b);
        let k: usize = dims_of(&self.data, &shared_a).iter().product();
        let m: usize = dims_a.iter().product();
        let n: usize = dims_b.iter().product();

        let perm_a: Vec<usize> = free_a.iter().chain(&shared_a).copied().collect();
        let perm_b: Vec<usize> = shared_b.iter().chain(&free_b).copied().collect();
        let a = to_matrix(self.data, &perm_a, m, k);
        let b = to_matrix(other.data, &perm_b, k, n);
        let product = a.dot(&b);

        let mut labels: Vec<String> = free_a.iter().map(|&i| self.labels[i].clone()).collect();
        labels.extend(free_b.iter().map(|&i| other.labels[i].clone()));
        let dims: Vec<usize> = dims_a.into_iter().chain(dims_b).collect();
        let data = product
            .into_shape_with_order(IxDyn(&dims))
            .expect("contraction dimensions agree");
        Labelled { data, labels }
    }
}

fn to_matrix(data: ArrayD<C64>, perm: &[usize], rows: usize, cols: usize) -> ndarray::Array2<C64> {
    let permuted = data.permuted_axes(IxDyn(perm));
    let owned = permuted.as_standard_layout().into_owned();
    owned
        .into_shape_with_order(IxDyn(&[rows, cols]))
        .and_then(|a| a.into_dimensionality::<Ix2>())
        .expect("matricization of a standard-layout array")
}

/// Full contraction, pairwise in node-list order followed by the deltas.
pub fn contract(diagram: &WiringDiagram) -> Result<DenseTensor> {
    diagram.validate()?;
    let d = diagram.d;
    let mut acc = Labelled::scalar();
    for node in &diagram.nodes {
        acc = acc.contract(Labelled::from_operator(
            &node.tensor,
            d,
            &node.inputs,
            &node.outputs,
        ));
    }
    let identity = DenseTensor::identity(d);
    for (i, o) in &diagram.deltas {
        acc = acc.contract(Labelled::from_operator(
            &identity,
            d,
            std::slice::from_ref(i),
            std::slice::from_ref(o),
        ));
    }
    let order: Vec<usize> = diagram
        .free_outputs
        .iter()
        .chain(&diagram.free_inputs)
        .map(|l| {
            acc.labels.iter().position(|x| x == l).ok_or_else(|| {
                Error::Diagram(format!("free label {l} vanished during contraction"))
            })
        })
        .collect::<Result<_>>()?;
    if order.len() != acc.labels.len() {
        return diagram_err("contraction left unmatched labels");
    }
    let (rows, cols) = diagram.output_dims()?;
    let matrix = to_matrix(acc.data, &order, rows, cols);
    Ok(DenseTensor::from_array2(matrix))
}

/// Independent oracle for [`contract`]: direct nested summation over every
/// internal label, one output element at a time.
pub fn brute_force_contract(diagram: &WiringDiagram) -> Result<DenseTensor> {
    diagram.validate()?;
    let d = diagram.d;
    let internal = diagram.internal_labels();
    let legs = diagram.free_outputs.len() + diagram.free_inputs.len() + internal.len();
    let terms = (d as u128).checked_pow(legs as u32).unwrap_or(u128::MAX);
    if terms > BRUTE_FORCE_LIMIT {
        return Err(Error::Resource(format!(
            "brute-force contraction needs {terms} terms (limit {BRUTE_FORCE_LIMIT})"
        )));
    }

    // Slot layout: free outputs, free inputs, then internal labels.
    let mut slot: HashMap<&str, usize> = HashMap::new();
    for (i, l) in diagram
        .free_outputs
        .iter()
        .chain(&diagram.free_inputs)
        .chain(&internal)
        .enumerate()
    {
        slot.insert(l, i);
    }
    let n_out = diagram.free_outputs.len();
    let n_free = n_out + diagram.free_inputs.len();

    // For each node: (slot, weight) per leg so that flat index = Σ value·weight.
    let node_legs: Vec<Vec<(usize, usize)>> = diagram
        .nodes
        .iter()
        .map(|node| {
            let legs: Vec<&String> = node.outputs.iter().chain(&node.inputs).collect();
            let total = legs.len();
            legs.iter()
                .enumerate()
                .map(|(j, l)| (slot[l.as_str()], d.pow((total - 1 - j) as u32)))
                .collect()
        })
        .collect();
    let delta_slots: Vec<(usize, usize)> = diagram
        .deltas
        .iter()
        .map(|(i, o)| (slot[i.as_str()], slot[o.as_str()]))
        .collect();

    let (rows, cols) = diagram.output_dims()?;
    let mut out = DenseTensor::zeros(vec![rows, cols]);
    let mut values = vec![0usize; slot.len()];
    let inner_count = d.pow(internal.len() as u32);

    for row in 0..rows {
        for col in 0..cols {
            let mut rem = row;
            for s in (0..n_out).rev() {
                values[s] = rem % d;
                rem /= d;
            }
            let mut rem = col;
            for s in (n_out..n_free).rev() {
                values[s] = rem % d;
                rem /= d;
            }
            let mut total = C64::new(0.0, 0.0);
            for inner in 0..inner_count {
                let mut rem = inner;
                for s in (n_free..values.len()).rev() {
                    values[s] = rem % d;
                    rem /= d;
                }
                if delta_slots.iter().any(|&(i, o)| values[i] != values[o]) {
                    continue;
                }
                let mut term = C64::new(1.0, 0.0);
                for (node, legs) in diagram.nodes.iter().zip(&node_legs) {
                    let flat: usize = legs.iter().map(|&(s, w)| values[s] * w).sum();
                    term *= node.tensor.entries()[flat];
                }
                total += term;
            }
            out.set(row, col, total);
        }
    }
    Ok(out)
}

/// Labels of one operator slot in a canonical diagram.
#[derive(Clone, Copy, Debug)]
pub struct SlotWiring {
    /// Which of the four R-matrices (1-based) occupies the slot.
    pub matrix: usize,
    pub inputs: [&'static str; 4],
    pub outputs: [&'static str; 4],
}

#[derive(Clone, Copy, Debug)]
pub struct CanonicalWiring {
    pub slots: [SlotWiring; 4],
    pub delta: (&'static str, &'static str),
}

/// Free input labels `a1..a9` in output-column order.
pub const FREE_INPUTS: [&str; 9] = ["a1", "a2", "a3", "a4", "a5", "a6", "a7", "a8", "a9"];
/// Free output labels `g1..g9` in output-row order.
pub const FREE_OUTPUTS: [&str; 9] = ["g1", "g2", "g3", "g4", "g5", "g6", "g7", "g8", "g9"];

/// Left side of the cubic equations; `a`, `b`, `g` stand for α, β, γ.
pub const LHS_WIRING: CanonicalWiring = CanonicalWiring {
    slots: [
        SlotWiring {
            matrix: 4,
            inputs: ["a5", "a2", "a6", "a3"],
            outputs: ["b1", "b2", "b6", "b3"],
        },
        SlotWiring {
            matrix: 3,
            inputs: ["a4", "a1", "b1", "b2"],
            outputs: ["g4", "g1", "b5", "b4"],
        },
        SlotWiring {
            matrix: 2,
            inputs: ["b5", "b6", "a8", "a9"],
            outputs: ["b7", "b8", "g8", "g9"],
        },
        SlotWiring {
            matrix: 1,
            inputs: ["b4", "b3", "b7", "b8"],
            outputs: ["g2", "g3", "g5", "g6"],
        },
    ],
    delta: ("a7", "g7"),
};

/// Right side of the cubic equations.
pub const RHS_WIRING: CanonicalWiring = CanonicalWiring {
    slots: [
        SlotWiring {
            matrix: 1,
            inputs: ["a4", "a5", "a7", "a8"],
            outputs: ["b7", "b8", "b5", "b6"],
        },
        SlotWiring {
            matrix: 2,
            inputs: ["a1", "a2", "b7", "b8"],
            outputs: ["g1", "g2", "b4", "b3"],
        },
        SlotWiring {
            matrix: 3,
            inputs: ["b6", "b3", "a9", "a6"],
            outputs: ["b1", "b2", "g9", "g6"],
        },
        SlotWiring {
            matrix: 4,
            inputs: ["b5", "b4", "b1", "b2"],
            outputs: ["g7", "g4", "g8", "g5"],
        },
    ],
    delta: ("a3", "g3"),
};

impl CanonicalWiring {
    /// Bind `matrices[i]` (the R-matrix numbered `i + 1`) into the diagram.
    pub fn bind(&self, d: usize, matrices: [&DenseTensor; 4]) -> WiringDiagram {
        let mut diagram = WiringDiagram::new(d, &FREE_INPUTS, &FREE_OUTPUTS);
        for slot in &self.slots {
            diagram = diagram.with_node(Node::new(
                format!("R{}", slot.matrix),
                matrices[slot.matrix - 1].clone(),
                &slot.inputs,
                &slot.outputs,
            ));
        }
        diagram.with_delta(self.delta.0, self.delta.1)
    }

    /// Sites (zero-based, in leg order) each slot acts on when the diagram is
    /// read as a sequence of embedded operators, first factor first.
    pub fn site_sequence(&self) -> Vec<(usize, Vec<usize>)> {
        let mut position: HashMap<&str, usize> = FREE_INPUTS
            .iter()
            .enumerate()
            .map(|(i, l)| (*l, i))
            .collect();
        let mut sequence = Vec::new();
        for slot in &self.slots {
            let sites: Vec<usize> = slot.inputs.iter().map(|l| position[l]).collect();
            for (l, &s) in slot.outputs.iter().zip(&sites) {
                position.insert(l, s);
            }
            sequence.push((slot.matrix, sites));
        }
        sequence
    }
}
