//! OBJ meshes, skinning sidecars and synthetic meshes.

pub mod obj;
pub mod skin;
pub mod synth;

pub use obj::{read_obj, write_obj};
pub use skin::{read_skin_sidecar, write_skin_sidecar, SkinSidecar};
