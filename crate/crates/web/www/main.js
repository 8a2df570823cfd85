// Expects the wasm-bindgen output (--target web) in ./pkg.
import init, { sample_sheet, kernel_split, renorm_table } from "./pkg/fracheat_web.js";

const num = (id) => Number(document.getElementById(id).value);

function guard(target, f) {
  try {
    target.textContent = "";
    target.className = "";
    f();
  } catch (e) {
    target.textContent = String(e.message ?? e);
    target.className = "err";
  }
}

function heatmap(canvas, values, rows, cols) {
  const ctx = canvas.getContext("2d");
  const img = ctx.createImageData(cols, rows);
  let lo = Infinity, hi = -Infinity;
  for (const v of values) { lo = Math.min(lo, v); hi = Math.max(hi, v); }
  const span = hi - lo || 1;
  for (let i = 0; i < values.length; i++) {
    const s = (values[i] - lo) / span;
    img.data.set([255 * s, 80, 255 * (1 - s), 255], 4 * i);
  }
  // rows are times: draw time left to right, space bottom to top
  const off = new OffscreenCanvas(cols, rows);
  off.getContext("2d").putImageData(img, 0, 0);
  ctx.save();
  ctx.setTransform(0, -canvas.height / cols, canvas.width / rows, 0, 0, canvas.height);
  ctx.imageSmoothingEnabled = false;
  ctx.drawImage(off, 0, 0);
  ctx.restore();
  return [lo, hi];
}

function curves(canvas, data, stride, colors) {
  const ctx = canvas.getContext("2d");
  ctx.clearRect(0, 0, canvas.width, canvas.height);
  const count = data.length / stride;
  let lo = 0, hi = 0;
  for (const v of data) { lo = Math.min(lo, v); hi = Math.max(hi, v); }
  const y = (v) => canvas.height - 10 - ((v - lo) / (hi - lo || 1)) * (canvas.height - 20);
  ctx.strokeStyle = "#ddd";
  ctx.beginPath(); ctx.moveTo(0, y(0)); ctx.lineTo(canvas.width, y(0)); ctx.stroke();
  colors.forEach((c, k) => {
    ctx.strokeStyle = c;
    ctx.beginPath();
    for (let i = 0; i < count; i++) {
      const px = (i / (count - 1)) * canvas.width;
      i === 0 ? ctx.moveTo(px, y(data[stride * i + k])) : ctx.lineTo(px, y(data[stride * i + k]));
    }
    ctx.stroke();
  });
}

await init();

document.getElementById("s-go").onclick = () => guard(document.getElementById("s-msg"), () => {
  const [nt, nx] = [128, 64];
  const canvas = document.getElementById("s-canvas");
  const v = sample_sheet(num("s-h1"), num("s-h2"), num("s-n"), BigInt(num("s-seed")), nt, nx);
  const [lo, hi] = heatmap(canvas, v, nt, nx);
  document.getElementById("s-msg").textContent = `t in [0, 1] across, x in [-1, 1] up; range [${lo.toFixed(3)}, ${hi.toFixed(3)}]`;
});

document.getElementById("k-go").onclick = () => guard(document.getElementById("k-msg"), () => {
  const v = kernel_split(num("k-t"), num("k-x"), 400);
  curves(document.getElementById("k-canvas"), v, 3, ["#000", "#2050d0", "#d03020"]);
  document.getElementById("k-msg").textContent = "black: G, blue: K, red: G#";
});

document.getElementById("r-go").onclick = () => {
  const out = document.getElementById("r-out");
  out.textContent = "computing...";
  // let the message paint before the blocking call
  setTimeout(() => guard(out, () => {
    const v = renorm_table(num("r-h1"), num("r-h2"), num("r-n"));
    const rows = Array.from(v.slice(0, -1), (c, i) => `<tr><td>${i + 1}</td><td>${c.toPrecision(8)}</td></tr>`);
    const limit = v[v.length - 1];
    out.innerHTML = `<table><tr><th>n</th><th>C^n</th></tr>${rows.join("")}</table>`
      + (Number.isNaN(limit) ? "" : `<p>rescaled limit ${limit.toPrecision(8)}</p>`);
  }), 10);
};
