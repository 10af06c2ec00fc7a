import init, { analyticCurves, entropyComparison, densityImage, period } from "./pkg/cvmaps_demo.js";

const COLORS = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e"];
const $ = (id) => document.getElementById(id);

function columns(flat, width) {
  const cols = Array.from({ length: width }, () => []);
  for (let i = 0; i < flat.length; i += width) {
    for (let c = 0; c < width; c++) cols[c].push(flat[i + c]);
  }
  return cols;
}

function plot(canvas, xs, series, legend) {
  const ctx = canvas.getContext("2d");
  const { width, height } = canvas;
  const pad = 40;
  ctx.clearRect(0, 0, width, height);
  let lo = Infinity, hi = -Infinity;
  for (const s of series) for (const v of s.values) { lo = Math.min(lo, v); hi = Math.max(hi, v); }
  if (hi === lo) hi = lo + 1;
  const x0 = xs[0], x1 = xs[xs.length - 1];
  const px = (x) => pad + ((x - x0) / (x1 - x0)) * (width - 2 * pad);
  const py = (y) => height - pad - ((y - lo) / (hi - lo)) * (height - 2 * pad);

  ctx.strokeStyle = "#999";
  ctx.strokeRect(pad, pad, width - 2 * pad, height - 2 * pad);
  ctx.fillStyle = "#444";
  ctx.font = "12px sans-serif";
  ctx.fillText(hi.toPrecision(3), 2, pad + 4);
  ctx.fillText(lo.toPrecision(3), 2, height - pad);
  ctx.fillText("t = " + x1.toFixed(3), width - pad - 50, height - pad + 16);

  series.forEach((s, k) => {
    ctx.strokeStyle = ctx.fillStyle = COLORS[k % COLORS.length];
    if (s.points) {
      s.values.forEach((v, i) => ctx.fillRect(px(xs[i]) - 2, py(v) - 2, 4, 4));
    } else {
      ctx.beginPath();
      s.values.forEach((v, i) => (i ? ctx.lineTo(px(xs[i]), py(v)) : ctx.moveTo(px(xs[i]), py(v))));
      ctx.stroke();
    }
  });
  legend.innerHTML = series
    .map((s, k) => `<span style="color:${COLORS[k % COLORS.length]}">${s.points ? "&#9632;" : "&#8212;"} ${s.name}</span>`)
    .join("");
}

function beta() {
  return Number($("beta").value);
}

function drawCurves() {
  const [t, eta, linear, vn, tsallis, ln] = columns(analyticCurves(beta(), 256), 6);
  plot($("curves"), t, [
    { name: "|eta|", values: eta },
    { name: "linear", values: linear },
    { name: "von Neumann", values: vn },
    { name: "Tsallis q=5", values: tsallis },
    { name: "log negativity", values: ln },
  ], $("curve-legend"));
}

function drawComparison() {
  const points = Number($("points").value);
  const [t, vnNum, vnExact, linNum, linExact] = columns(entropyComparison(beta(), points, 48), 5);
  plot($("comparison"), t, [
    { name: "von Neumann (closed form)", values: vnExact },
    { name: `von Neumann (${points} points)`, values: vnNum, points: true },
    { name: "linear (closed form)", values: linExact },
    { name: `linear (${points} points)`, values: linNum, points: true },
  ], $("compare-legend"));
}

function drawDensity() {
  const canvas = $("density");
  const n = 200;
  const t = Number($("time").value) * period();
  $("time-label").textContent = t.toFixed(3);
  const img = densityImage(beta(), t, n);
  const peak = img[1];
  const ctx = canvas.getContext("2d");
  const data = ctx.createImageData(n, n);
  for (let i = 0; i < n; i++) {
    for (let j = 0; j < n; j++) {
      const v = Math.sqrt(img[2 + i * n + j] / peak);
      const o = 4 * ((n - 1 - i) * n + j);
      data.data[o] = 255 * v;
      data.data[o + 1] = 80 * v;
      data.data[o + 2] = 255 * (1 - v);
      data.data[o + 3] = 255;
    }
  }
  const off = new OffscreenCanvas(n, n);
  off.getContext("2d").putImageData(data, 0, 0);
  ctx.imageSmoothingEnabled = false;
  ctx.drawImage(off, 0, 0, canvas.width, canvas.height);
}

function guarded(f) {
  return () => {
    try {
      $("error").textContent = "";
      f();
    } catch (e) {
      $("error").textContent = String(e);
    }
  };
}

await init();
const redraw = guarded(() => { drawCurves(); drawDensity(); });
$("beta").addEventListener("change", redraw);
$("time").addEventListener("input", guarded(drawDensity));
$("compare").addEventListener("click", guarded(drawComparison));
redraw();
