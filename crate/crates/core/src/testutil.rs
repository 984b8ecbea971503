//! Shared fixtures for unit tests.

use crate::algebra::{AlgebraContext, CtxRef, Enclosure, Rat};
use crate::toric::{build_quasifold, PratoQuasifold, SimplePolytope};

fn r(n: i64) -> Rat {
    Rat::from_integer(n.into())
}

fn rr(n: i64, d: i64) -> Rat {
    Rat::new(n.into(), d.into())
}

/// Q(sqrt2) with the enclosure sqrt2 in [7/5, 3/2].
pub(crate) fn sqrt2_ctx() -> CtxRef {
    AlgebraContext::new(
        vec!["1".into(), "sqrt2".into()],
        vec![
            vec![vec![r(1), r(0)], vec![r(0), r(1)]],
            vec![vec![r(0), r(1)], vec![r(2), r(0)]],
        ],
        vec![
            Enclosure::point(r(1)),
            Enclosure::new(rr(7, 5), rr(3, 2)).unwrap(),
        ],
        64,
    )
    .unwrap()
}

/// The interval [0, k]: facets -xi <= 0 and xi <= k.
pub(crate) fn interval(k: i64) -> PratoQuasifold {
    let ctx = AlgebraContext::rational();
    let p = SimplePolytope::new(
        ctx.clone(),
        1,
        vec![
            (vec![ctx.from_int(-1)], ctx.from_int(0)),
            (vec![ctx.from_int(1)], ctx.from_int(k)),
        ],
    )
    .unwrap();
    build_quasifold(p).unwrap()
}

/// The standard simplex at level k: the projective-plane fixture.
pub(crate) fn cp2(k: i64) -> PratoQuasifold {
    let ctx = AlgebraContext::rational();
    let p = SimplePolytope::new(
        ctx.clone(),
        2,
        vec![
            (vec![ctx.from_int(-1), ctx.from_int(0)], ctx.from_int(0)),
            (vec![ctx.from_int(0), ctx.from_int(-1)], ctx.from_int(0)),
            (vec![ctx.from_int(1), ctx.from_int(1)], ctx.from_int(k)),
        ],
    )
    .unwrap();
    build_quasifold(p).unwrap()
}

/// The quasi-interval with facets -xi <= 0 and sqrt2 xi <= sqrt2.
pub(crate) fn quasi_interval() -> PratoQuasifold {
    let ctx = sqrt2_ctx();
    let s = ctx.generator(1);
    let p = SimplePolytope::new(
        ctx.clone(),
        1,
        vec![
            (vec![ctx.from_int(-1)], ctx.from_int(0)),
            (vec![s.clone()], s),
        ],
    )
    .unwrap();
    build_quasifold(p).unwrap()
}

/// The unit square [0, 1]^2.
pub(crate) fn unit_square() -> PratoQuasifold {
    let ctx = AlgebraContext::rational();
    let p = SimplePolytope::new(
        ctx.clone(),
        2,
        vec![
            (vec![ctx.from_int(-1), ctx.from_int(0)], ctx.from_int(0)),
            (vec![ctx.from_int(0), ctx.from_int(-1)], ctx.from_int(0)),
            (vec![ctx.from_int(1), ctx.from_int(0)], ctx.from_int(1)),
            (vec![ctx.from_int(0), ctx.from_int(1)], ctx.from_int(1)),
        ],
    )
    .unwrap();
    build_quasifold(p).unwrap()
}
