//! Forward kinematics by prefix products over the linkage tree.

use super::{Chain, Conformation};
use crate::error::{Error, Result};
use crate::geometry::{rotation_unchecked, Mat3, RigidTransform, Vec3};

/// Per-link rigid motion from the ZP frame plus the moved joint axes.
#[derive(Debug, Clone)]
pub struct Kinematics {
    /// Rotation M per link (link 0 is the identity).
    pub rot: Vec<Mat3>,
    /// Translation per link: r = rot · r⁰ + trans.
    pub trans: Vec<Vec3>,
    /// Current joint axis unit vectors u_k.
    pub axis: Vec<Vec3>,
    /// Current joint axis points p_k (axis-start atom).
    pub point: Vec<Vec3>,
}

impl Kinematics {
    pub fn compute(chain: &Chain, conf: &Conformation) -> Result<Self> {
        if conf.theta.len() != chain.dof() {
            return Err(Error::LengthMismatch {
                expected: chain.dof(),
                got: conf.theta.len(),
            });
        }
        let l = chain.dof();
        let mut rot = Vec::with_capacity(l + 1);
        let mut trans = Vec::with_capacity(l + 1);
        let mut axis = Vec::with_capacity(l);
        let mut point = Vec::with_capacity(l);
        rot.push(Mat3::identity());
        trans.push(Vec3::zeros());
        for (k, joint) in chain.joints.iter().enumerate() {
            let parent_link = joint.parent.map_or(0, |p| p + 1);
            let (pr, pt) = (rot[parent_link], trans[parent_link]);
            let p0 = chain.atoms[joint.axis.0].zp;
            let r = rotation_unchecked(&joint.u0, conf.theta[k]).m;
            let m = pr * r;
            let p = pr * p0 + pt;
            rot.push(m);
            trans.push(p - m * p0);
            axis.push(pr * joint.u0);
            point.push(p);
        }
        Ok(Kinematics {
            rot,
            trans,
            axis,
            point,
        })
    }

    pub fn positions(&self, chain: &Chain) -> Vec<Vec3> {
        chain
            .atoms
            .iter()
            .map(|a| self.rot[a.link] * a.zp + self.trans[a.link])
            .collect()
    }
}

/// M per joint (rotation of link `k + 1`).
pub fn link_transforms(chain: &Chain, conf: &Conformation) -> Result<Vec<RigidTransform>> {
    let k = Kinematics::compute(chain, conf)?;
    Ok(k.rot[1..].iter().map(|&m| RigidTransform { m }).collect())
}

/// M per joint by multiplying every rotation on the root path left to right.
pub fn naive_link_transforms(chain: &Chain, conf: &Conformation) -> Result<Vec<RigidTransform>> {
    if conf.theta.len() != chain.dof() {
        return Err(Error::LengthMismatch {
            expected: chain.dof(),
            got: conf.theta.len(),
        });
    }
    let mut out = Vec::with_capacity(chain.dof());
    for k in 0..chain.dof() {
        let mut path = vec![k];
        while let Some(p) = chain.joints[*path.last().unwrap()].parent {
            path.push(p);
        }
        let mut m = Mat3::identity();
        for &j in path.iter().rev() {
            m *= rotation_unchecked(&chain.joints[j].u0, conf.theta[j]).m;
        }
        out.push(RigidTransform { m });
    }
    Ok(out)
}

pub fn forward_kinematics(chain: &Chain, conf: &Conformation) -> Result<Vec<Vec3>> {
    Ok(Kinematics::compute(chain, conf)?.positions(chain))
}
