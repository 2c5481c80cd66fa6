// Copyright 2026 The cfpe Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//    http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

//! Randomized invariants of the linear algebra, weak values and pointer.

use nalgebra::DMatrix;
use proptest::prelude::*;

use cfpe::hilbert::{tensor, BasisSpec, Operator, StateVector, Tensor, C64};
use cfpe::protocol::{self, Arm, PostSelectionConvention};
use cfpe::weakvalues::{
    pointer_readout, von_neumann_couple, weak_value, PointerConfig, PrePostEnsemble, WeakValueOrdering,
};

fn amps(n: usize) -> impl Strategy<Value = Vec<C64>> {
    prop::collection::vec((-1.0..1.0f64, -1.0..1.0f64).prop_map(|(a, b)| C64::new(a, b)), n)
}

fn int_amps(n: usize) -> impl Strategy<Value = Vec<C64>> {
    prop::collection::vec((-4i32..5, -4i32..5).prop_map(|(a, b)| C64::new(a as f64, b as f64)), n)
}

fn state(name: &'static str, d: usize, v: Vec<C64>) -> StateVector {
    StateVector::new(BasisSpec::single(name, d).unwrap(), v).unwrap()
}

fn op(b: &BasisSpec, v: Vec<C64>) -> Operator {
    let n = b.dim();
    Operator::new(b.clone(), DMatrix::from_row_slice(n, n, &v)).unwrap()
}

fn hermitian(b: &BasisSpec, v: Vec<C64>) -> Operator {
    let m = op(b, v);
    m.add(&m.adjoint()).unwrap().scale(C64::new(0.5, 0.0))
}

fn nonzero(v: &[C64]) -> bool {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>() > 1e-6
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn kronecker_is_associative_on_integers(a in int_amps(2), b in int_amps(3), c in int_amps(2)) {
        let (a, b, c) = (state("a", 2, a), state("b", 3, b), state("c", 2, c));
        let left = tensor(&tensor(&a, &b).unwrap(), &c).unwrap();
        let right = tensor(&a, &tensor(&b, &c).unwrap()).unwrap();
        prop_assert_eq!(left.basis(), right.basis());
        prop_assert_eq!(left.amplitudes(), right.amplitudes());
    }

    #[test]
    fn operator_kronecker_matches_action(m1 in int_amps(4), m2 in int_amps(9), a in int_amps(2), b in int_amps(3)) {
        let ba = BasisSpec::single("a", 2).unwrap();
        let bb = BasisSpec::single("b", 3).unwrap();
        let (oa, ob) = (op(&ba, m1), op(&bb, m2));
        let (sa, sb) = (state("a", 2, a), state("b", 3, b));
        let joint = oa.tensor(&ob).unwrap().apply(&sa.tensor(&sb).unwrap()).unwrap();
        let separate = oa.apply(&sa).unwrap().tensor(&ob.apply(&sb).unwrap()).unwrap();
        prop_assert_eq!(joint.amplitudes(), separate.amplitudes());
    }

    #[test]
    fn sandwich_conjugate_symmetry(m in amps(16), a in amps(4), b in amps(4)) {
        let basis = BasisSpec::new([("x", 2), ("y", 2)]).unwrap();
        let o = op(&basis, m);
        let sa = StateVector::new(basis.clone(), a).unwrap();
        let sb = StateVector::new(basis, b).unwrap();
        let lhs = o.sandwich(&sa, &sb).unwrap();
        let rhs = o.adjoint().sandwich(&sb, &sa).unwrap().conj();
        prop_assert!((lhs - rhs).norm() <= 1e-12);
    }

    #[test]
    fn unitaries_preserve_norm(theta in 0.0..6.3f64, phi in 0.0..6.3f64, d in 2usize..5, v in amps(10), t in 0.0..5.0f64) {
        let b = protocol::system_basis(d).unwrap();
        let mut v = v;
        v.resize(b.dim(), C64::new(0.3, -0.1));
        let s = StateVector::new(b.clone(), v).unwrap();
        for u in [
            protocol::beam_splitter(theta, phi, &b).unwrap(),
            protocol::phase_shifter(phi, &b).unwrap(),
            protocol::field_hamiltonian(&b).unwrap().evolution(t).unwrap(),
        ] {
            prop_assert!((u.apply(&s).unwrap().norm() - s.norm()).abs() <= 1e-12 * (1.0 + s.norm()));
        }
    }

    #[test]
    fn builder_projectors_are_idempotent(d in 2usize..6, n in 0usize..6) {
        let b = protocol::full_basis(d).unwrap();
        let mut ps = vec![
            protocol::arm_projector(Arm::I, &b).unwrap(),
            protocol::arm_projector(Arm::II, &b).unwrap(),
        ];
        if n < d {
            ps.push(protocol::number_projector(n, &b).unwrap());
        } else {
            prop_assert!(protocol::number_projector(n, &b).is_err());
        }
        for p in ps {
            let sq = p.compose(&p).unwrap();
            prop_assert_eq!(sq.matrix(), p.matrix());
            prop_assert_eq!(&p.matrix().adjoint(), p.matrix());
        }
    }

    #[test]
    fn weak_values_ignore_state_normalization(pre in amps(4), post in amps(4), m in amps(16),
                                              c1 in 0.1..10.0f64, c2 in 0.1..10.0f64, ph in 0.0..6.3f64) {
        prop_assume!(nonzero(&pre) && nonzero(&post));
        let b = protocol::system_basis(2).unwrap();
        let pre = StateVector::new(b.clone(), pre).unwrap();
        let post = StateVector::new(b.clone(), post).unwrap();
        let e = PrePostEnsemble::new(&pre, &post).unwrap();
        prop_assume!(e.postselection_probability() > 1e-4);
        let scaled = PrePostEnsemble::new(&pre.scale(C64::from_polar(c1, ph)), &post.scale(C64::new(c2, 0.0))).unwrap();
        let a = hermitian(&b, m);
        let w = weak_value(&a, &e, WeakValueOrdering::PostApre).unwrap().value;
        let ws = weak_value(&a, &scaled, WeakValueOrdering::PostApre).unwrap().value;
        prop_assert!((w - ws).norm() <= 1e-10 * (1.0 + w.norm()));
    }

    #[test]
    fn orderings_are_conjugate_for_hermitian(pre in amps(4), post in amps(4), m in amps(16)) {
        prop_assume!(nonzero(&pre) && nonzero(&post));
        let b = protocol::system_basis(2).unwrap();
        let e = PrePostEnsemble::new(&StateVector::new(b.clone(), pre).unwrap(), &StateVector::new(b.clone(), post).unwrap()).unwrap();
        prop_assume!(e.postselection_probability() > 1e-4);
        let a = hermitian(&b, m);
        let w1 = weak_value(&a, &e, WeakValueOrdering::PostApre).unwrap().value;
        let w2 = weak_value(&a, &e, WeakValueOrdering::PreApost).unwrap().value;
        prop_assert!((w1 - w2.conj()).norm() <= 1e-10 * (1.0 + w1.norm()));
    }

    #[test]
    fn arm_projector_weak_values_are_complete(pre in amps(8), post in amps(8)) {
        prop_assume!(nonzero(&pre) && nonzero(&post));
        let b = protocol::full_basis(2).unwrap();
        let e = PrePostEnsemble::new(&StateVector::new(b.clone(), pre).unwrap(), &StateVector::new(b.clone(), post).unwrap()).unwrap();
        prop_assume!(e.postselection_probability() > 1e-4);
        let wi = weak_value(&protocol::arm_projector(Arm::I, &b).unwrap(), &e, WeakValueOrdering::PostApre).unwrap().value;
        let wii = weak_value(&protocol::arm_projector(Arm::II, &b).unwrap(), &e, WeakValueOrdering::PostApre).unwrap().value;
        prop_assert!((wi + wii - C64::new(1.0, 0.0)).norm() <= 1e-10 * (1.0 + wi.norm()));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    // |mean − g·Re(A_w)| ≤ C·g² for the protocol observables.
    #[test]
    fn pointer_deviation_is_quadratic_in_g(g in 0.005..0.1f64, which in 0usize..4, literal in any::<bool>()) {
        let conv = if literal { PostSelectionConvention::Literal } else { PostSelectionConvention::ClaimConsistent };
        let e = PrePostEnsemble::protocol(conv, 2).unwrap();
        let b = e.pre().basis().clone();
        let a = match which {
            0 => protocol::arm_projector(Arm::I, &b).unwrap(),
            1 => protocol::arm_projector(Arm::II, &b).unwrap(),
            2 => protocol::arm_hamiltonian(Arm::I, &b).unwrap(),
            _ => protocol::arm_hamiltonian(Arm::II, &b).unwrap(),
        };
        let w = weak_value(&a, &e, WeakValueOrdering::PostApre).unwrap().value.re;
        let joint = von_neumann_couple(e.pre(), &a, &PointerConfig::default().with_coupling(g)).unwrap();
        let r = pointer_readout(&joint, e.post()).unwrap();
        prop_assert!((r.mean - g * w).abs() <= 2.0 * g * g, "g = {g}: mean {} against {}", r.mean, g * w);
    }
}
