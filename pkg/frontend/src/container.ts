// Decoder for the binary field container the service returns.
// Layout: magic "GWHP", version u16, nx u16, ny u16, channel count u8, then
// one 16-byte NUL-padded ASCII name per channel, then channel data as
// little-endian float32, row-major (ny rows of nx), in name order.

export interface FieldContainer {
  nx: number;
  ny: number;
  names: string[];
  channels: Map<string, Float32Array>; // each of length nx*ny, row-major
}

const MAGIC = "GWHP";
const HEADER_BYTES = 11;
const NAME_BYTES = 16;

export function decodeContainer(buf: ArrayBuffer): FieldContainer {
  if (buf.byteLength < HEADER_BYTES) {
    throw new Error("truncated field container header");
  }
  const view = new DataView(buf);
  const magic = String.fromCharCode(
    view.getUint8(0), view.getUint8(1), view.getUint8(2), view.getUint8(3));
  if (magic !== MAGIC) {
    throw new Error(`bad magic ${JSON.stringify(magic)}`);
  }
  const version = view.getUint16(4, true);
  if (version !== 1) {
    throw new Error(`unsupported format version ${version}`);
  }
  const nx = view.getUint16(6, true);
  const ny = view.getUint16(8, true);
  const nchan = view.getUint8(10);

  let offset = HEADER_BYTES;
  const names: string[] = [];
  const raw = new Uint8Array(buf);
  for (let c = 0; c < nchan; c++) {
    if (offset + NAME_BYTES > buf.byteLength) {
      throw new Error("truncated channel name table");
    }
    let end = offset;
    while (end < offset + NAME_BYTES && raw[end] !== 0) end++;
    names.push(String.fromCharCode(...raw.subarray(offset, end)));
    offset += NAME_BYTES;
  }

  const count = nx * ny;
  const channels = new Map<string, Float32Array>();
  for (const name of names) {
    const end = offset + 4 * count;
    if (end > buf.byteLength) {
      throw new Error(`truncated channel data for ${JSON.stringify(name)}`);
    }
    // Float32Array needs 4-byte alignment; the 11-byte header breaks it, so
    // copy through a DataView.
    const values = new Float32Array(count);
    for (let k = 0; k < count; k++) {
      values[k] = view.getFloat32(offset + 4 * k, true);
    }
    channels.set(name, values);
    offset = end;
  }
  if (offset !== buf.byteLength) {
    throw new Error("trailing bytes after last channel");
  }
  return { nx, ny, names, channels };
}

export function decodeBase64(b64: string): ArrayBuffer {
  const bin = atob(b64);
  const bytes = new Uint8Array(bin.length);
  for (let i = 0; i < bin.length; i++) bytes[i] = bin.charCodeAt(i);
  return bytes.buffer;
}

// Test helper and offline fixture builder: the inverse of decodeContainer.
export function encodeContainer(
  nx: number, ny: number, channels: Array<[string, Float32Array | number[]]>,
): ArrayBuffer {
  const count = nx * ny;
  const total = HEADER_BYTES + channels.length * NAME_BYTES + channels.length * 4 * count;
  const buf = new ArrayBuffer(total);
  const view = new DataView(buf);
  const raw = new Uint8Array(buf);
  for (let i = 0; i < 4; i++) raw[i] = MAGIC.charCodeAt(i);
  view.setUint16(4, 1, true);
  view.setUint16(6, nx, true);
  view.setUint16(8, ny, true);
  view.setUint8(10, channels.length);
  let offset = HEADER_BYTES;
  for (const [name] of channels) {
    if (name.length === 0 || name.length > NAME_BYTES) {
      throw new Error(`channel name must be 1..${NAME_BYTES} ASCII bytes`);
    }
    for (let i = 0; i < name.length; i++) raw[offset + i] = name.charCodeAt(i);
    offset += NAME_BYTES;
  }
  for (const [name, values] of channels) {
    if (values.length !== count) {
      throw new Error(`channel ${name} has ${values.length} values, expected ${count}`);
    }
    for (let k = 0; k < count; k++) {
      view.setFloat32(offset + 4 * k, Number(values[k]), true);
    }
    offset += 4 * count;
  }
  return buf;
}
