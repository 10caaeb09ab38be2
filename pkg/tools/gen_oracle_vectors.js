// Regenerates the frozen oracle constants in the test suite from the
// published TLSH JavaScript port (npm package "tlsh", idealista/tlsh-js).
//
// Usage:
//   python3 tools/vector_inputs.py /tmp/oracle/inputs
//   node tools/gen_oracle_vectors.js /tmp/oracle/inputs > /tmp/oracle/out.json
//
// Requires `npm install tlsh` next to this script or on NODE_PATH.

"use strict";

const fs = require("fs");
const path = require("path");

const hash = require("tlsh");
const DigestHashBuilder = require("tlsh/lib/digests/digest-hash-builder");

function digestOf(str) {
  return "T1" + hash(str);
}

function parse(t1hex) {
  return new DigestHashBuilder().withHash(t1hex.slice(2).toLowerCase()).build();
}

function dist(a, b, withLen) {
  return parse(a).calculateDifference(parse(b), withLen);
}

// Mirrors random.Random(seed).randbytes(n) is not reproducible in JS, so
// inputs are read from files produced by tools/vector_inputs.py.
function readLatin1(p) {
  return fs.readFileSync(p, "latin1");
}

function mulberry32(seed) {
  // Small deterministic PRNG for the perturbation experiments.
  let a = seed >>> 0;
  return function () {
    a |= 0;
    a = (a + 0x6d2b79f5) | 0;
    let t = Math.imul(a ^ (a >>> 15), 1 | a);
    t = (t + Math.imul(t ^ (t >>> 7), 61 | t)) ^ t;
    return ((t ^ (t >>> 14)) >>> 0) / 4294967296;
  };
}

function flipBytes(str, rng, maxFlips) {
  const buf = Buffer.from(str, "latin1");
  const n = 1 + Math.floor(rng() * maxFlips);
  for (let i = 0; i < n; i++) {
    const pos = Math.floor(rng() * buf.length);
    const delta = 1 + Math.floor(rng() * 255);
    buf[pos] = buf[pos] ^ delta;
  }
  return buf.toString("latin1");
}

function insertMarker(str, marker) {
  const off = Math.floor(str.length / 4);
  return str.slice(0, off) + marker + str.slice(off);
}

function randomBuffer(rng, size) {
  const buf = Buffer.alloc(size);
  for (let i = 0; i < size; i++) buf[i] = Math.floor(rng() * 256);
  return buf.toString("latin1");
}

function main() {
  const indir = process.argv[2];
  const out = { vectors: [], distance_pairs: [], lvalue_boundaries: [] };

  // 1. Digest vectors for every generated input file.
  const files = fs.readdirSync(indir).sort();
  for (const f of files) {
    const data = readLatin1(path.join(indir, f));
    out.vectors.push({ input: f.replace(/\.bin$/, ""), len: data.length, tlsh: digestOf(data) });
  }

  // 2. Pairwise distances over the first ten vector digests, both modes.
  const ds = out.vectors.slice(0, 10).map((v) => v.tlsh);
  for (let i = 0; i < ds.length; i++) {
    for (let j = i + 1; j < ds.length; j++) {
      out.distance_pairs.push({
        i: i,
        j: j,
        with_len: dist(ds[i], ds[j], true),
        no_len: dist(ds[i], ds[j], false),
      });
    }
  }

  // 3. Length-code boundaries: every length where the encoded value changes,
  //    swept densely over the practical range. digest-builder does not
  //    export its length capture, so recompute it with the same constants.
  function lvalue(length) {
    const L15 = 0.4054651, L13 = 0.26236426, L11 = 0.095310180;
    let i;
    if (length <= 656) i = Math.floor(Math.log(length) / L15);
    else if (length <= 3199) i = Math.floor(Math.log(length) / L13 - 8.72777);
    else i = Math.floor(Math.log(length) / L11 - 62.5472);
    return i % 256;
  }
  let prev = lvalue(1);
  out.lvalue_boundaries.push({ len: 1, code: prev });
  const SWEEP_MAX = 5000000;
  for (let n = 2; n <= SWEEP_MAX; n++) {
    const c = lvalue(n);
    if (c !== prev) {
      out.lvalue_boundaries.push({ len: n, code: c });
      prev = c;
    }
  }

  // 4. Perturbation bounds on an 8 KiB buffer (uses the "random/109/8192"
  //    input so Python can regenerate the same base).
  const base = readLatin1(path.join(indir, "random_109_8192.bin"));
  const baseDigest = digestOf(base);
  const rng = mulberry32(0xc0ffee);
  let flipMax = 0;
  const flipDists = [];
  for (let t = 0; t < 50; t++) {
    const mutated = flipBytes(base, rng, 8);
    const d = dist(baseDigest, digestOf(mutated), true);
    flipDists.push(d);
    if (d > flipMax) flipMax = d;
  }

  // Marker insertion (forge corrupt-body shape): 256-byte marker at len/4.
  let markerBytes = Buffer.alloc(256);
  for (let i = 0; i < 256; i++) markerBytes[i] = i;
  const marker = markerBytes.toString("latin1");
  const markerDists = [];
  for (const v of out.vectors) {
    if (!v.input.startsWith("random_")) continue;
    if (v.len < 4096) continue;
    const data = readLatin1(path.join(indir, v.input + ".bin"));
    markerDists.push({ input: v.input, d: dist(v.tlsh, digestOf(insertMarker(data, marker)), true) });
  }

  // Independent random buffers: how far apart unrelated content sits.
  let unrelMin = Infinity;
  const unrel = [];
  for (let t = 0; t < 50; t++) {
    const a = randomBuffer(rng, 8192);
    const b = randomBuffer(rng, 8192);
    const d = dist(digestOf(a), digestOf(b), true);
    unrel.push(d);
    if (d < unrelMin) unrelMin = d;
  }

  out.perturbation = {
    base_input: "random_109_8192.bin",
    base_digest: baseDigest,
    flip_distances: flipDists,
    flip_max: flipMax,
    marker_distances: markerDists,
    unrelated_distances: unrel,
    unrelated_min: unrelMin,
  };

  process.stdout.write(JSON.stringify(out));
}

main();
