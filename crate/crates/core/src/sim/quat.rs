//! Unit-quaternion helpers, [w, x, y, z] convention.

pub type Quat = [f64; 4];
pub type Vec3 = [f64; 3];

pub const IDENTITY: Quat = [1.0, 0.0, 0.0, 0.0];

pub fn mul(a: Quat, b: Quat) -> Quat {
    [
        a[0] * b[0] - a[1] * b[1] - a[2] * b[2] - a[3] * b[3],
        a[0] * b[1] + a[1] * b[0] + a[2] * b[3] - a[3] * b[2],
        a[0] * b[2] - a[1] * b[3] + a[2] * b[0] + a[3] * b[1],
        a[0] * b[3] + a[1] * b[2] - a[2] * b[1] + a[3] * b[0],
    ]
}

pub fn normalize(q: Quat) -> Quat {
    let n = (q[0] * q[0] + q[1] * q[1] + q[2] * q[2] + q[3] * q[3]).sqrt();
    [q[0] / n, q[1] / n, q[2] / n, q[3] / n]
}

pub fn norm(q: Quat) -> f64 {
    (q[0] * q[0] + q[1] * q[1] + q[2] * q[2] + q[3] * q[3]).sqrt()
}

/// Rotates a body-frame vector into the world frame.
pub fn rotate(q: Quat, v: Vec3) -> Vec3 {
    // v' = v + 2 w (u x v) + 2 u x (u x v), u = (x, y, z)
    let u = [q[1], q[2], q[3]];
    let uv = cross(u, v);
    let uuv = cross(u, uv);
    [
        v[0] + 2.0 * (q[0] * uv[0] + uuv[0]),
        v[1] + 2.0 * (q[0] * uv[1] + uuv[1]),
        v[2] + 2.0 * (q[0] * uv[2] + uuv[2]),
    ]
}

/// Rotates a world-frame vector into the body frame.
pub fn rotate_inv(q: Quat, v: Vec3) -> Vec3 {
    rotate([q[0], -q[1], -q[2], -q[3]], v)
}

/// Integrates body-frame angular velocity over dt and renormalizes.
pub fn integrate(q: Quat, omega_body: Vec3, dt: f64) -> Quat {
    let dq = mul(q, [0.0, omega_body[0], omega_body[1], omega_body[2]]);
    normalize([
        q[0] + 0.5 * dt * dq[0],
        q[1] + 0.5 * dt * dq[1],
        q[2] + 0.5 * dt * dq[2],
        q[3] + 0.5 * dt * dq[3],
    ])
}

pub fn from_yaw(yaw: f64) -> Quat {
    [(yaw / 2.0).cos(), 0.0, 0.0, (yaw / 2.0).sin()]
}

pub fn yaw(q: Quat) -> f64 {
    let siny = 2.0 * (q[0] * q[3] + q[1] * q[2]);
    let cosy = 1.0 - 2.0 * (q[2] * q[2] + q[3] * q[3]);
    siny.atan2(cosy)
}

/// Unit gravity direction expressed in the body frame.
pub fn gravity_body(q: Quat) -> Vec3 {
    rotate_inv(q, [0.0, 0.0, -1.0])
}

pub fn cross(a: Vec3, b: Vec3) -> Vec3 {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

pub fn dot(a: Vec3, b: Vec3) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

pub fn add(a: Vec3, b: Vec3) -> Vec3 {
    [a[0] + b[0], a[1] + b[1], a[2] + b[2]]
}

pub fn sub(a: Vec3, b: Vec3) -> Vec3 {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

pub fn scale(a: Vec3, s: f64) -> Vec3 {
    [a[0] * s, a[1] * s, a[2] * s]
}

pub fn norm3(a: Vec3) -> f64 {
    dot(a, a).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_rotation() {
        let v = [1.0, 2.0, 3.0];
        assert_eq!(rotate(IDENTITY, v), v);
    }

    #[test]
    fn yaw_rotation_of_x_axis() {
        let q = from_yaw(std::f64::consts::FRAC_PI_2);
        let v = rotate(q, [1.0, 0.0, 0.0]);
        assert!((v[0]).abs() < 1e-12);
        assert!((v[1] - 1.0).abs() < 1e-12);
        assert!((yaw(q) - std::f64::consts::FRAC_PI_2).abs() < 1e-12);
    }

    #[test]
    fn rotate_inv_is_inverse() {
        let q = normalize([0.9, 0.1, -0.2, 0.3]);
        let v = [0.4, -1.2, 2.0];
        let w = rotate_inv(q, rotate(q, v));
        for i in 0..3 {
            assert!((w[i] - v[i]).abs() < 1e-12);
        }
    }

    #[test]
    fn gravity_in_level_body_frame_points_down() {
        let g = gravity_body(IDENTITY);
        assert_eq!(g, [0.0, 0.0, -1.0]);
    }

    #[test]
    fn integration_keeps_unit_norm() {
        let mut q = from_yaw(0.3);
        for _ in 0..1000 {
            q = integrate(q, [0.5, -1.2, 2.0], 0.005);
            assert!((norm(q) - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn integration_about_z_accumulates_yaw() {
        let mut q = IDENTITY;
        let omega = 1.0;
        let dt = 1e-4;
        for _ in 0..10000 {
            q = integrate(q, [0.0, 0.0, omega], dt);
        }
        assert!((yaw(q) - 1.0).abs() < 1e-4);
    }
}
