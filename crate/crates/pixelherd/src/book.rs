//! Compiles the book's code listings as doctests, so `cargo test --doc`
//! fails whenever the guide drifts away from the library.

#[cfg(doctest)]
mod guide {
    #![doc = include_str!("../../../book/src/introduction.md")]

    #[doc = include_str!("../../../book/src/model.md")]
    mod model {}
    #[doc = include_str!("../../../book/src/operators.md")]
    mod operators {}
    #[doc = include_str!("../../../book/src/costs.md")]
    mod costs {}
    #[doc = include_str!("../../../book/src/adjoint.md")]
    mod adjoint {}
    #[doc = include_str!("../../../book/src/dal.md")]
    mod dal {}
    #[doc = include_str!("../../../book/src/tv-admm.md")]
    mod tv_admm {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
