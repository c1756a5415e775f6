/**
 * Canonical state rendering, byte-identical to the headless client's dump:
 * nodes sorted by path, GUI elements by uid, floats at 9 significant digits,
 * byte blobs as length + truncated SHA-256.
 */

import { Mirror } from "./mirror";
import { WireValue } from "./wire";

// ---------------------------------------------------------------------------
// %.9g float formatting with exact decimal expansion (round-half-even),
// matching CPython's format(x, ".9g") digit for digit.

const PRECISION = 9;

function decomposeDouble(value: number): { sign: boolean; mantissa: bigint; exp2: number } {
  const buf = new DataView(new ArrayBuffer(8));
  buf.setFloat64(0, value);
  const hi = buf.getUint32(0);
  const lo = buf.getUint32(4);
  const sign = (hi & 0x80000000) !== 0;
  const biasedExp = (hi >>> 20) & 0x7ff;
  const mantissaHigh = BigInt(hi & 0xfffff);
  const mantissa52 = (mantissaHigh << 32n) | BigInt(lo >>> 0);
  if (biasedExp === 0) {
    return { sign, mantissa: mantissa52, exp2: -1074 }; // subnormal
  }
  return { sign, mantissa: mantissa52 | (1n << 52n), exp2: biasedExp - 1075 };
}

export function formatG(value: number): string {
  if (Number.isNaN(value)) return "nan";
  if (value === Infinity) return "inf";
  if (value === -Infinity) return "-inf";
  if (value === 0) return Object.is(value, -0) ? "-0" : "0";

  const { sign, mantissa, exp2 } = decomposeDouble(value);
  // exact decimal digits: v = mantissa * 2^exp2 = digits * 10^(exp10 - len + 1)
  let digits: string;
  let exp10: number;
  if (exp2 >= 0) {
    digits = (mantissa << BigInt(exp2)).toString();
    exp10 = digits.length - 1;
  } else {
    // v = mantissa * 5^(-exp2) * 10^(exp2)
    digits = (mantissa * 5n ** BigInt(-exp2)).toString();
    exp10 = digits.length - 1 + exp2;
  }

  // round to PRECISION significant digits, half to even
  let rounded: string;
  if (digits.length <= PRECISION) {
    rounded = digits.padEnd(PRECISION, "0");
  } else {
    const head = digits.slice(0, PRECISION);
    const next = digits.charCodeAt(PRECISION) - 48;
    const sticky = /[1-9]/.test(digits.slice(PRECISION + 1));
    let up = next > 5 || (next === 5 && sticky);
    if (next === 5 && !sticky) {
      up = (digits.charCodeAt(PRECISION - 1) - 48) % 2 === 1;
    }
    if (up) {
      const bumped = (BigInt(head) + 1n).toString();
      if (bumped.length > PRECISION) {
        rounded = bumped.slice(0, PRECISION);
        exp10 += 1;
      } else {
        rounded = bumped;
      }
    } else {
      rounded = head;
    }
  }

  let text: string;
  if (exp10 < -4 || exp10 >= PRECISION) {
    let mant = rounded.replace(/0+$/, "");
    if (mant.length === 0) mant = "0";
    const mantText = mant.length > 1 ? `${mant[0]}.${mant.slice(1)}` : mant;
    const expSign = exp10 < 0 ? "-" : "+";
    const expDigits = Math.abs(exp10).toString().padStart(2, "0");
    text = `${mantText}e${expSign}${expDigits}`;
  } else if (exp10 >= 0) {
    const intPart = rounded.slice(0, exp10 + 1);
    const fracPart = rounded.slice(exp10 + 1).replace(/0+$/, "");
    text = fracPart.length ? `${intPart}.${fracPart}` : intPart;
  } else {
    const fracPart = ("0".repeat(-exp10 - 1) + rounded).replace(/0+$/, "");
    text = `0.${fracPart}`;
  }
  return sign ? `-${text}` : text;
}

// ---------------------------------------------------------------------------
// SHA-256 (synchronous; canonical dumps must not be async)

const K = new Uint32Array([
  0x428a2f98, 0x71374491, 0xb5c0fbcf, 0xe9b5dba5, 0x3956c25b, 0x59f111f1, 0x923f82a4, 0xab1c5ed5,
  0xd807aa98, 0x12835b01, 0x243185be, 0x550c7dc3, 0x72be5d74, 0x80deb1fe, 0x9bdc06a7, 0xc19bf174,
  0xe49b69c1, 0xefbe4786, 0x0fc19dc6, 0x240ca1cc, 0x2de92c6f, 0x4a7484aa, 0x5cb0a9dc, 0x76f988da,
  0x983e5152, 0xa831c66d, 0xb00327c8, 0xbf597fc7, 0xc6e00bf3, 0xd5a79147, 0x06ca6351, 0x14292967,
  0x27b70a85, 0x2e1b2138, 0x4d2c6dfc, 0x53380d13, 0x650a7354, 0x766a0abb, 0x81c2c92e, 0x92722c85,
  0xa2bfe8a1, 0xa81a664b, 0xc24b8b70, 0xc76c51a3, 0xd192e819, 0xd6990624, 0xf40e3585, 0x106aa070,
  0x19a4c116, 0x1e376c08, 0x2748774c, 0x34b0bcb5, 0x391c0cb3, 0x4ed8aa4a, 0x5b9cca4f, 0x682e6ff3,
  0x748f82ee, 0x78a5636f, 0x84c87814, 0x8cc70208, 0x90befffa, 0xa4506ceb, 0xbef9a3f7, 0xc67178f2,
]);

export function sha256Hex(data: Uint8Array): string {
  const bitLength = data.length * 8;
  const padded = new Uint8Array(((data.length + 8) >> 6 << 6) + 64);
  padded.set(data);
  padded[data.length] = 0x80;
  const dv = new DataView(padded.buffer);
  dv.setUint32(padded.length - 8, Math.floor(bitLength / 0x100000000));
  dv.setUint32(padded.length - 4, bitLength >>> 0);

  const h = new Uint32Array([
    0x6a09e667, 0xbb67ae85, 0x3c6ef372, 0xa54ff53a, 0x510e527f, 0x9b05688c, 0x1f83d9ab, 0x5be0cd19,
  ]);
  const w = new Uint32Array(64);
  const rotr = (x: number, n: number) => (x >>> n) | (x << (32 - n));

  for (let block = 0; block < padded.length; block += 64) {
    for (let i = 0; i < 16; i++) w[i] = dv.getUint32(block + i * 4);
    for (let i = 16; i < 64; i++) {
      const s0 = rotr(w[i - 15], 7) ^ rotr(w[i - 15], 18) ^ (w[i - 15] >>> 3);
      const s1 = rotr(w[i - 2], 17) ^ rotr(w[i - 2], 19) ^ (w[i - 2] >>> 10);
      w[i] = (w[i - 16] + s0 + w[i - 7] + s1) >>> 0;
    }
    let [a, b, c, d, e, f, g, hh] = h;
    for (let i = 0; i < 64; i++) {
      const s1 = rotr(e, 6) ^ rotr(e, 11) ^ rotr(e, 25);
      const ch = (e & f) ^ (~e & g);
      const t1 = (hh + s1 + ch + K[i] + w[i]) >>> 0;
      const s0 = rotr(a, 2) ^ rotr(a, 13) ^ rotr(a, 22);
      const maj = (a & b) ^ (a & c) ^ (b & c);
      const t2 = (s0 + maj) >>> 0;
      hh = g; g = f; f = e;
      e = (d + t1) >>> 0;
      d = c; c = b; b = a;
      a = (t1 + t2) >>> 0;
    }
    h[0] = (h[0] + a) >>> 0; h[1] = (h[1] + b) >>> 0;
    h[2] = (h[2] + c) >>> 0; h[3] = (h[3] + d) >>> 0;
    h[4] = (h[4] + e) >>> 0; h[5] = (h[5] + f) >>> 0;
    h[6] = (h[6] + g) >>> 0; h[7] = (h[7] + hh) >>> 0;
  }
  return [...h].map((x) => x.toString(16).padStart(8, "0")).join("");
}

// ---------------------------------------------------------------------------
// value formatting

/** JSON string escape with ensure_ascii semantics (non-ASCII as \uXXXX). */
function asciiJson(s: string): string {
  return JSON.stringify(s).replace(
    /[-￿]/g,
    (ch) => "\\u" + ch.charCodeAt(0).toString(16).padStart(4, "0"),
  );
}

export function formatValue(value: WireValue): string {
  if (value === null || value === undefined) return "null";
  if (value === true) return "true";
  if (value === false) return "false";
  if (typeof value === "number") return formatG(value);
  if (typeof value === "string") return asciiJson(value);
  if (value instanceof Uint8Array) {
    return `bytes${value.length}:${sha256Hex(value).slice(0, 16)}`;
  }
  if (Array.isArray(value)) {
    return "(" + value.map(formatValue).join(",") + ")";
  }
  throw new Error(`cannot render value canonically: ${typeof value}`);
}

// ---------------------------------------------------------------------------
// state rendering

export function canonicalState(mirror: Mirror): string {
  const lines: string[] = ["scene:"];
  for (const path of mirror.sortedNodePaths()) {
    const node = mirror.nodes.get(path)!;
    const parts = [
      `  ${path}`,
      `kind=${node.kind}`,
      `visible=${formatValue(node.visible)}`,
      `clickable=${formatValue(node.clickable)}`,
      `wxyz=${formatValue(node.pose.wxyz)}`,
      `position=${formatValue(node.pose.position)}`,
    ];
    for (const key of Object.keys(node.props).sort()) {
      parts.push(`${key}=${formatValue(node.props[key])}`);
    }
    lines.push(parts.join(" "));
  }
  lines.push("gui:");
  for (const uid of mirror.sortedGuiUids()) {
    const el = mirror.gui.get(uid)!;
    const parts = [
      `  ${uid}`,
      `kind=${el.kind}`,
      `container=${el.containerUid}`,
      `order=${el.order}`,
      `value=${formatValue(el.value)}`,
    ];
    for (const key of Object.keys(el.props).sort()) {
      parts.push(`${key}=${formatValue(el.props[key])}`);
    }
    lines.push(parts.join(" "));
  }
  const cam = mirror.camera;
  lines.push(
    "camera: " +
      `wxyz=${formatValue(cam.pose.wxyz)} position=${formatValue(cam.pose.position)} ` +
      `fov=${formatValue(cam.fov)} aspect=${formatValue(cam.aspect)} look_at=${formatValue(cam.lookAt)}`,
  );
  return lines.join("\n") + "\n";
}
