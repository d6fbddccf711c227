pub mod abgroups;
pub mod cech;
pub mod doc;
pub mod lattice;
pub mod limits;
pub mod morphisms;
pub mod presheaf;
pub mod sources;
pub mod theorems;
