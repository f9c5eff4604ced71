//! The property suite: each check runs on the fixed-seed instances.

use proptest::prelude::*;
use proptest::test_runner::{TestCaseError, TestError};

use seshadri::engine::transport_curve;
use seshadri::quad::rat_int;
use seshadri::{Attainment, Engine, LatticeClass, Positivity, QuadValue, SeshadriResult, Surface};

use super::*;

type Outcome = Result<(), TestCaseError>;

fn constant(inst: &Instance) -> SeshadriResult {
    inst.engine().seshadri_constant(&inst.l).expect("ample class")
}

pub fn square_dominates(inst: Instance) -> Outcome {
    let r = constant(&inst);
    let l2 = inst.surface().matrix().self_int(&inst.l).unwrap();
    prop_assert!(r.value.is_positive());
    prop_assert!(r.value.square() <= rat_int(l2), "{inst:?}: {}", r.value);
    prop_assert_eq!(r.attained_by.contains(&Attainment::SqrtBound), r.value.square() == rat_int(l2));
    Ok(())
}

pub fn homogeneous(inst: Instance) -> Outcome {
    let one = constant(&inst).value;
    let three = inst.engine().seshadri_constant(&inst.l.scaled(3)).unwrap().value;
    prop_assert_eq!(three, one.scale(&rat_int(3)));
    Ok(())
}

pub fn isometry_invariant((inst, (u, inv)): (Instance, Unimodular)) -> Outcome {
    // In the basis given by the columns of U the form is UᵀSU and L has
    // coordinates U⁻¹L.
    let moved = Surface::from_entries(congruent(&inst.entries, &u)).unwrap();
    let mut l = LatticeClass::new(apply(&inv, inst.l.coords()));
    // The new basis may identify the ample cone with the negative cone.
    if moved.positivity(&l).unwrap() == Positivity::NotNef {
        l = l.neg();
    }
    let before = constant(&inst);
    let after = Engine::new(moved).with_verification(false).seshadri_constant(&l).unwrap();
    prop_assert_eq!(&before.value, &after.value);
    // Permutations preserving S are isometries of the same lattice.
    let surface = inst.surface();
    if congruent(&inst.entries, &u) == inst.entries {
        if let Ok(psi) = surface.matrix().check_isometry(surface.h(), u.clone()) {
            let image = psi.apply(&inst.l);
            let r = inst.engine().seshadri_constant(&image).unwrap();
            prop_assert_eq!(&r.value, &before.value);
            for c in &before.curves {
                let t = transport_curve(&surface, c, &psi).unwrap();
                prop_assert_eq!(t.eval_class(&image), c.eval_class(&inst.l));
            }
        }
    }
    Ok(())
}

pub fn witnesses_evaluate_to_the_constant(inst: Instance) -> Outcome {
    let r = constant(&inst);
    for c in &r.curves {
        prop_assert_eq!(QuadValue::from_rational(c.eval_class(&inst.l)), r.value.clone(), "{:?}", c);
    }
    prop_assert!(!r.curves.is_empty() || r.attained_by == vec![Attainment::SqrtBound]);
    Ok(())
}

/// Rank two, and a cube of at most 600: the oracle is quadratic in it.
pub fn truncation_is_sound(inst: Instance) -> Outcome {
    let r = constant(&inst);
    let radius = 3 * r.diagnostics.pell_box.max(r.diagnostics.elliptic_box).max(1) as i64;
    if inst.l.rho() != 2 || radius > 600 {
        return Err(TestCaseError::reject("large box"));
    }
    let s = inst.surface();
    let oracle = truncated_minimum(s.matrix(), &inst.l, radius);
    prop_assert!(oracle >= r.value, "{inst:?}: oracle {oracle} < {}", r.value);
    Ok(())
}

pub fn with_isometry() -> impl Strategy<Value = (Instance, Unimodular)> {
    instance().prop_flat_map(|inst| {
        let rho = inst.l.rho();
        (Just(inst), unimodular(rho))
    })
}

/// Runs every property; the error names the first one that failed.
pub fn run_all() -> Result<(), String> {
    fn check<T: std::fmt::Debug>(name: &str, r: Result<(), TestError<T>>) -> Result<(), String> {
        r.map_err(|e| format!("{name}: {e}"))
    }
    check("ε² ≤ L²", runner().run(&instance(), square_dominates))?;
    check("ε(3L) = 3ε(L)", runner().run(&instance(), homogeneous))?;
    check("isometry invariance", runner().run(&with_isometry(), isometry_invariant))?;
    check("3×-box truncation", runner().run(&instance(), truncation_is_sound))?;
    check("witness functionals", runner().run(&instance(), witnesses_evaluate_to_the_constant))
}
