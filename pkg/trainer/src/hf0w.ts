/** HF0W weight container: magic "HF0W", u32 version/input_lags/context/count,
 * then per tensor a u16 name length, utf-8 name, u8 rank, u32 dims, and a
 * float32 little-endian payload.
 */

export const HF0W_MAGIC = "HF0W";
export const HF0W_VERSION = 1;

export interface NamedTensor {
  name: string;
  dims: number[];
  data: Float32Array;
}

export interface WeightFile {
  inputLags: number;
  context: number;
  tensors: NamedTensor[];
}

export function encodeWeights(file: WeightFile): Buffer {
  const chunks: Buffer[] = [];
  const header = Buffer.alloc(4 + 16);
  header.write(HF0W_MAGIC, 0, "ascii");
  header.writeUInt32LE(HF0W_VERSION, 4);
  header.writeUInt32LE(file.inputLags, 8);
  header.writeUInt32LE(file.context, 12);
  header.writeUInt32LE(file.tensors.length, 16);
  chunks.push(header);
  for (const tensor of file.tensors) {
    const expected = tensor.dims.reduce((a, b) => a * b, 1);
    if (tensor.data.length !== expected) {
      throw new Error(
        `tensor ${tensor.name}: ${tensor.data.length} values do not fill dims [${tensor.dims}]`,
      );
    }
    const name = Buffer.from(tensor.name, "utf-8");
    const meta = Buffer.alloc(2 + name.length + 1 + 4 * tensor.dims.length);
    meta.writeUInt16LE(name.length, 0);
    name.copy(meta, 2);
    meta.writeUInt8(tensor.dims.length, 2 + name.length);
    tensor.dims.forEach((d, i) => meta.writeUInt32LE(d, 2 + name.length + 1 + 4 * i));
    const payload = Buffer.alloc(4 * tensor.data.length);
    tensor.data.forEach((v, i) => payload.writeFloatLE(v, 4 * i));
    chunks.push(meta, payload);
  }
  return Buffer.concat(chunks);
}

export function decodeWeights(data: Buffer): WeightFile {
  let pos = 0;
  const take = (n: number): Buffer => {
    if (pos + n > data.length) {
      throw new Error(`unexpected end of file at offset ${pos}`);
    }
    const chunk = data.subarray(pos, pos + n);
    pos += n;
    return chunk;
  };
  if (take(4).toString("ascii") !== HF0W_MAGIC) {
    throw new Error("bad magic (not an HF0W file)");
  }
  const version = take(4).readUInt32LE(0);
  if (version !== HF0W_VERSION) {
    throw new Error(`unsupported version ${version}`);
  }
  const inputLags = take(4).readUInt32LE(0);
  const context = take(4).readUInt32LE(0);
  const count = take(4).readUInt32LE(0);
  const tensors: NamedTensor[] = [];
  for (let i = 0; i < count; i++) {
    const nameLen = take(2).readUInt16LE(0);
    const name = take(nameLen).toString("utf-8");
    const rank = take(1).readUInt8(0);
    const dims: number[] = [];
    for (let d = 0; d < rank; d++) {
      dims.push(take(4).readUInt32LE(0));
    }
    const size = dims.reduce((a, b) => a * b, 1);
    const payload = take(4 * size);
    const values = new Float32Array(size);
    for (let v = 0; v < size; v++) {
      values[v] = payload.readFloatLE(4 * v);
    }
    tensors.push({ name, dims, data: values });
  }
  return { inputLags, context, tensors };
}

/** Golden fixture file: u32 count, then per fixture the flattened input grid
 * and the 9 posteriors, all float32 little-endian.
 */
export function encodeFixtures(
  grids: Float32Array[],
  posteriors: Float32Array[],
  gridSize: number,
): Buffer {
  if (grids.length !== posteriors.length) {
    throw new Error("grid and posterior counts differ");
  }
  const out = Buffer.alloc(4 + grids.length * 4 * (gridSize + 9));
  out.writeUInt32LE(grids.length, 0);
  let pos = 4;
  for (let i = 0; i < grids.length; i++) {
    if (grids[i].length !== gridSize || posteriors[i].length !== 9) {
      throw new Error(`fixture ${i}: wrong grid or posterior size`);
    }
    for (const v of grids[i]) {
      out.writeFloatLE(v, pos);
      pos += 4;
    }
    for (const v of posteriors[i]) {
      out.writeFloatLE(v, pos);
      pos += 4;
    }
  }
  return out;
}
