//! Quantales built from finite spaces and finite commutative rings.

pub mod ring;
pub mod space;

pub use ring::{
    ideal_quantale, ideals_of_zmod, induced_surjection_morphism, quotient_ring, tau, tau_map, theta, theta_map,
    FiniteRing, Ideal, IdealQuantale, RingError, RingHom, RingKind,
};
pub use space::{components, locale_of_space, space_of_locale, FiniteSpace, SpaceError};
