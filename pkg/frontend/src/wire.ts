/**
 * MessagePack encoding for wire frames: the same subset the server speaks
 * (nil, bool, int, float64, str, bin, array, string-keyed map). Encoding is
 * canonical; decoding fails closed with the byte offset.
 */

const MAX_DEPTH = 64;

export class WireDecodeError extends Error {
  readonly offset: number;
  constructor(message: string, offset: number) {
    super(`${message} (at byte ${offset})`);
    this.offset = offset;
  }
}

export type WireValue =
  | null
  | boolean
  | number
  | string
  | Uint8Array
  | WireValue[]
  | { [key: string]: WireValue };

// ---------------------------------------------------------------------------
// encoding

class Writer {
  private buf = new Uint8Array(256);
  private view = new DataView(this.buf.buffer);
  length = 0;

  private ensure(extra: number): void {
    if (this.length + extra <= this.buf.length) return;
    let capacity = this.buf.length * 2;
    while (capacity < this.length + extra) capacity *= 2;
    const next = new Uint8Array(capacity);
    next.set(this.buf.subarray(0, this.length));
    this.buf = next;
    this.view = new DataView(next.buffer);
  }

  u8(value: number): void {
    this.ensure(1);
    this.buf[this.length++] = value;
  }

  u16(value: number): void {
    this.ensure(2);
    this.view.setUint16(this.length, value);
    this.length += 2;
  }

  u32(value: number): void {
    this.ensure(4);
    this.view.setUint32(this.length, value);
    this.length += 4;
  }

  u64(value: bigint): void {
    this.ensure(8);
    this.view.setBigUint64(this.length, value);
    this.length += 8;
  }

  i64(value: bigint): void {
    this.ensure(8);
    this.view.setBigInt64(this.length, value);
    this.length += 8;
  }

  f64(value: number): void {
    this.ensure(8);
    this.view.setFloat64(this.length, value);
    this.length += 8;
  }

  bytes(data: Uint8Array): void {
    this.ensure(data.length);
    this.buf.set(data, this.length);
    this.length += data.length;
  }

  take(): Uint8Array {
    return this.buf.slice(0, this.length);
  }
}

const utf8Encoder = new TextEncoder();
const utf8Decoder = new TextDecoder("utf-8", { fatal: true });

function encodeInto(out: Writer, value: WireValue): void {
  if (value === null || value === undefined) {
    out.u8(0xc0);
  } else if (value === true) {
    out.u8(0xc3);
  } else if (value === false) {
    out.u8(0xc2);
  } else if (typeof value === "number") {
    if (Number.isInteger(value) && Number.isSafeInteger(value)) {
      encodeInt(out, value);
    } else {
      out.u8(0xcb);
      out.f64(value);
    }
  } else if (typeof value === "string") {
    const data = utf8Encoder.encode(value);
    if (data.length <= 31) {
      out.u8(0xa0 | data.length);
    } else if (data.length <= 0xff) {
      out.u8(0xd9);
      out.u8(data.length);
    } else if (data.length <= 0xffff) {
      out.u8(0xda);
      out.u16(data.length);
    } else {
      out.u8(0xdb);
      out.u32(data.length);
    }
    out.bytes(data);
  } else if (value instanceof Uint8Array) {
    if (value.length <= 0xff) {
      out.u8(0xc4);
      out.u8(value.length);
    } else if (value.length <= 0xffff) {
      out.u8(0xc5);
      out.u16(value.length);
    } else {
      out.u8(0xc6);
      out.u32(value.length);
    }
    out.bytes(value);
  } else if (Array.isArray(value)) {
    if (value.length <= 15) {
      out.u8(0x90 | value.length);
    } else if (value.length <= 0xffff) {
      out.u8(0xdc);
      out.u16(value.length);
    } else {
      out.u8(0xdd);
      out.u32(value.length);
    }
    for (const item of value) encodeInto(out, item);
  } else {
    const entries = Object.entries(value).filter(([, v]) => v !== undefined);
    if (entries.length <= 15) {
      out.u8(0x80 | entries.length);
    } else if (entries.length <= 0xffff) {
      out.u8(0xde);
      out.u16(entries.length);
    } else {
      out.u8(0xdf);
      out.u32(entries.length);
    }
    for (const [key, item] of entries) {
      encodeInto(out, key);
      encodeInto(out, item);
    }
  }
}

function encodeInt(out: Writer, value: number): void {
  if (value >= 0) {
    if (value <= 0x7f) out.u8(value);
    else if (value <= 0xff) {
      out.u8(0xcc);
      out.u8(value);
    } else if (value <= 0xffff) {
      out.u8(0xcd);
      out.u16(value);
    } else if (value <= 0xffffffff) {
      out.u8(0xce);
      out.u32(value);
    } else {
      out.u8(0xcf);
      out.u64(BigInt(value));
    }
  } else {
    if (value >= -32) out.u8(value & 0xff);
    else if (value >= -0x80) {
      out.u8(0xd0);
      out.u8(value & 0xff);
    } else if (value >= -0x8000) {
      out.u8(0xd1);
      out.u16(value & 0xffff);
    } else if (value >= -0x80000000) {
      out.u8(0xd2);
      out.u32(value >>> 0);
    } else {
      out.u8(0xd3);
      out.i64(BigInt(value));
    }
  }
}

export function encode(value: WireValue): Uint8Array {
  const out = new Writer();
  encodeInto(out, value);
  return out.take();
}

// ---------------------------------------------------------------------------
// decoding

class Reader {
  pos = 0;
  private view: DataView;
  constructor(private data: Uint8Array) {
    this.view = new DataView(data.buffer, data.byteOffset, data.byteLength);
  }

  private need(n: number): void {
    if (this.pos + n > this.data.length) {
      throw new WireDecodeError("unexpected end of frame", this.pos);
    }
  }

  u8(): number {
    this.need(1);
    return this.data[this.pos++];
  }

  u16(): number {
    this.need(2);
    const v = this.view.getUint16(this.pos);
    this.pos += 2;
    return v;
  }

  u32(): number {
    this.need(4);
    const v = this.view.getUint32(this.pos);
    this.pos += 4;
    return v;
  }

  i8(): number {
    this.need(1);
    const v = this.view.getInt8(this.pos);
    this.pos += 1;
    return v;
  }

  i16(): number {
    this.need(2);
    const v = this.view.getInt16(this.pos);
    this.pos += 2;
    return v;
  }

  i32(): number {
    this.need(4);
    const v = this.view.getInt32(this.pos);
    this.pos += 4;
    return v;
  }

  u64(): number {
    this.need(8);
    const v = this.view.getBigUint64(this.pos);
    this.pos += 8;
    return safeInt(v, this.pos - 8);
  }

  i64(): number {
    this.need(8);
    const v = this.view.getBigInt64(this.pos);
    this.pos += 8;
    return safeInt(v, this.pos - 8);
  }

  f32(): number {
    this.need(4);
    const v = this.view.getFloat32(this.pos);
    this.pos += 4;
    return v;
  }

  f64(): number {
    this.need(8);
    const v = this.view.getFloat64(this.pos);
    this.pos += 8;
    return v;
  }

  raw(n: number): Uint8Array {
    this.need(n);
    const chunk = this.data.slice(this.pos, this.pos + n);
    this.pos += n;
    return chunk;
  }

  str(n: number, start: number): string {
    try {
      return utf8Decoder.decode(this.raw(n));
    } catch {
      throw new WireDecodeError("invalid utf-8 in string", start);
    }
  }

  atEnd(): boolean {
    return this.pos === this.data.length;
  }
}

function safeInt(v: bigint, offset: number): number {
  if (v > BigInt(Number.MAX_SAFE_INTEGER) || v < BigInt(Number.MIN_SAFE_INTEGER)) {
    throw new WireDecodeError("integer exceeds safe range", offset);
  }
  return Number(v);
}

function readValue(r: Reader, depth: number): WireValue {
  if (depth > MAX_DEPTH) throw new WireDecodeError("nesting too deep", r.pos);
  const start = r.pos;
  const tag = r.u8();

  if (tag <= 0x7f) return tag;
  if (tag >= 0xe0) return tag - 0x100;
  if (tag >= 0x80 && tag <= 0x8f) return readMap(r, tag & 0x0f, depth);
  if (tag >= 0x90 && tag <= 0x9f) return readArray(r, tag & 0x0f, depth);
  if (tag >= 0xa0 && tag <= 0xbf) return r.str(tag & 0x1f, start);

  switch (tag) {
    case 0xc0:
      return null;
    case 0xc2:
      return false;
    case 0xc3:
      return true;
    case 0xc4:
      return r.raw(r.u8());
    case 0xc5:
      return r.raw(r.u16());
    case 0xc6:
      return r.raw(r.u32());
    case 0xca:
      return r.f32();
    case 0xcb:
      return r.f64();
    case 0xcc:
      return r.u8();
    case 0xcd:
      return r.u16();
    case 0xce:
      return r.u32();
    case 0xcf:
      return r.u64();
    case 0xd0:
      return r.i8();
    case 0xd1:
      return r.i16();
    case 0xd2:
      return r.i32();
    case 0xd3:
      return r.i64();
    case 0xd9:
      return r.str(r.u8(), start);
    case 0xda:
      return r.str(r.u16(), start);
    case 0xdb:
      return r.str(r.u32(), start);
    case 0xdc:
      return readArray(r, r.u16(), depth);
    case 0xdd:
      return readArray(r, r.u32(), depth);
    case 0xde:
      return readMap(r, r.u16(), depth);
    case 0xdf:
      return readMap(r, r.u32(), depth);
    default:
      throw new WireDecodeError(`unsupported type byte 0x${tag.toString(16)}`, start);
  }
}

function readArray(r: Reader, n: number, depth: number): WireValue[] {
  const out: WireValue[] = [];
  for (let i = 0; i < n; i++) out.push(readValue(r, depth + 1));
  return out;
}

function readMap(r: Reader, n: number, depth: number): { [key: string]: WireValue } {
  const out: { [key: string]: WireValue } = {};
  for (let i = 0; i < n; i++) {
    const keyPos = r.pos;
    const key = readValue(r, depth + 1);
    if (typeof key !== "string") {
      throw new WireDecodeError("map key is not a string", keyPos);
    }
    out[key] = readValue(r, depth + 1);
  }
  return out;
}

export function decode(data: Uint8Array): WireValue {
  const r = new Reader(data);
  const value = readValue(r, 0);
  if (!r.atEnd()) throw new WireDecodeError("trailing bytes after value", r.pos);
  return value;
}

// ---------------------------------------------------------------------------
// batch envelope

export interface RawMessage {
  type: string;
  [field: string]: WireValue;
}

export function encodeFrame(seq: number, messages: RawMessage[]): Uint8Array {
  return encode([seq, messages as unknown as WireValue[]]);
}

export function decodeFrame(data: Uint8Array): { seq: number; messages: RawMessage[] } {
  const top = decode(data);
  if (!Array.isArray(top) || top.length !== 2) {
    throw new WireDecodeError("frame is not a [seq, messages] envelope", 0);
  }
  const [seq, rawMessages] = top;
  if (typeof seq !== "number" || !Number.isInteger(seq) || seq < 0) {
    throw new WireDecodeError("batch seq is not a non-negative integer", 0);
  }
  if (!Array.isArray(rawMessages)) {
    throw new WireDecodeError("batch message list is malformed", 0);
  }
  const messages: RawMessage[] = [];
  for (const raw of rawMessages) {
    if (raw === null || typeof raw !== "object" || Array.isArray(raw) || raw instanceof Uint8Array) {
      throw new WireDecodeError("batch entry is not a map", 0);
    }
    const type = (raw as { [key: string]: WireValue }).type;
    if (typeof type !== "string") {
      throw new WireDecodeError("message has no 'type' string field", 0);
    }
    messages.push(raw as RawMessage);
  }
  return { seq, messages };
}
