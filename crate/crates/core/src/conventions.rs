//! Index, sign and normalization conventions used everywhere in the crate.
//!
//! # Curvature
//!
//! Components are stored in an orthonormal frame `e_1, ..., e_n` as
//!
//! ```text
//! R_ABCD = <R(e_A, e_B) e_C, e_D>,   R(X,Y)Z = ∇_X ∇_Y Z - ∇_Y ∇_X Z - ∇_[X,Y] Z
//! ```
//!
//! so the sectional curvature of the plane spanned by orthonormal `u, v` is
//! `K(u,v) = R(u,v,v,u)` and the round unit sphere has `K = +1`.
//!
//! For a Lagrangian point in a complex space form of holomorphic sectional
//! curvature `4c`, the Gauss equation in this convention reads
//!
//! ```text
//! R_XYZW = Σ_E (h^E_YZ h^E_XW - h^E_XZ h^E_YW) + c (δ_XW δ_YZ - δ_XZ δ_YW)
//! ```
//!
//! and the wedge operator is `(X ∧ Y) Z = <Y,Z> X - <X,Z> Y`, so that the
//! constant-curvature tensor is `R(X,Y)Z = c (X ∧ Y) Z`.
//!
//! # Scalar curvature
//!
//! `τ = Σ_{i<j} K(e_i, e_j) = Σ_{i<j} R_ijji`, which is half of the usual
//! scalar curvature. Only this normalization is exposed. For an `r`-dimensional
//! subspace `L` with orthonormal basis `f_1..f_r`, `τ(L) = Σ_{a<b} K(f_a, f_b)`.
//!
//! # Cubic form
//!
//! `h^A_BC = <h(e_B, e_C), J e_A>`, totally symmetric in `(A, B, C)`. The
//! mean curvature components are `H^A = (1/n) Σ_B h^A_BB` and
//! `H² = Σ_A (H^A)²`. The constant `c` is stored exactly as it appears in the
//! inequalities, i.e. the ambient space has holomorphic sectional curvature
//! `4c` (`c = 0` for `C^n`, `c = 1` for `CP^n(4)`).
//!
//! # Complex coordinates
//!
//! A point of `C^m` is stored as the real vector
//! `(Re z_1, ..., Re z_m, Im z_1, ..., Im z_m)`; the complex structure acts as
//! `J(x, y) = (-y, x)`.
//!
//! # Indices
//!
//! Rust APIs are 0-based. The JSON input format and CLI tuple listings in
//! reports use 1-based cubic-form indices, matching the usual notation.
//!
//! # Consistency pin
//!
//! The conventions above are pinned by the exotic Berger sphere: its Gauss
//! reconstruction gives `K_12 = -5/3`, `K_13 = K_23 = 1` and `τ = 1/3`, which
//! agrees with the intrinsic curvature computed from the Lie brackets of the
//! defining vector fields (see `tests/exotic_s3.rs`).
