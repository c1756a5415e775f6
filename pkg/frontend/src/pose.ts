/**
 * Rigid transforms mirroring the server's composition rule exactly:
 * (q, t) ∘ (q', t') = (q·q', t + rotate(q, t')). All math in float64 with
 * the same operation order, so replayed states match bit-for-bit.
 */

export type Quat = [number, number, number, number]; // scalar-first
export type Vec3 = [number, number, number];

export interface Pose {
  wxyz: Quat;
  position: Vec3;
}

export function identityPose(): Pose {
  return { wxyz: [1, 0, 0, 0], position: [0, 0, 0] };
}

export function normalizeWxyz(raw: ArrayLike<number>): Quat {
  const w = raw[0], x = raw[1], y = raw[2], z = raw[3];
  const norm = Math.sqrt(w * w + x * x + y * y + z * z);
  if (!(norm >= 1e-8)) {
    throw new Error(`degenerate quaternion norm ${norm}`);
  }
  return [w / norm, x / norm, y / norm, z / norm];
}

export function makePose(wxyz: ArrayLike<number>, position: ArrayLike<number>): Pose {
  return {
    wxyz: normalizeWxyz(wxyz),
    position: [position[0], position[1], position[2]],
  };
}

export function rotate(q: Quat, v: Vec3): Vec3 {
  const [w, x, y, z] = q;
  const [vx, vy, vz] = v;
  const tx = 2.0 * (y * vz - z * vy);
  const ty = 2.0 * (z * vx - x * vz);
  const tz = 2.0 * (x * vy - y * vx);
  return [
    vx + w * tx + (y * tz - z * ty),
    vy + w * ty + (z * tx - x * tz),
    vz + w * tz + (x * ty - y * tx),
  ];
}

export function compose(parent: Pose, local: Pose): Pose {
  const [w1, x1, y1, z1] = parent.wxyz;
  const [w2, x2, y2, z2] = local.wxyz;
  const q: Quat = [
    w1 * w2 - x1 * x2 - y1 * y2 - z1 * z2,
    w1 * x2 + x1 * w2 + y1 * z2 - z1 * y2,
    w1 * y2 - x1 * z2 + y1 * w2 + z1 * x2,
    w1 * z2 + x1 * y2 - y1 * x2 + z1 * w2,
  ];
  const r = rotate(parent.wxyz, local.position);
  return {
    wxyz: q,
    position: [
      parent.position[0] + r[0],
      parent.position[1] + r[1],
      parent.position[2] + r[2],
    ],
  };
}
