pub mod action;
pub mod error;
pub mod hopf;
pub mod hpoly;
pub mod io;
pub mod lie;
pub mod quantize;
pub mod linfty;
pub mod sample;
pub mod scalar;

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/series.md")]
    mod series {}
    #[doc = include_str!("../../../book/src/multivectors.md")]
    mod multivectors {}
    #[doc = include_str!("../../../book/src/twists.md")]
    mod twists {}
    #[doc = include_str!("../../../book/src/maurer_cartan.md")]
    mod maurer_cartan {}
    #[doc = include_str!("../../../book/src/star_products.md")]
    mod star_products {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
