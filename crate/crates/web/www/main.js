import init, { quasiFlowCurve, cosineOnset, deformationMap } from "./pkg/quasiflow_web.js";

const $ = (id) => document.getElementById(id);
const num = (id) => parseFloat($(id).value);

function axes(ctx, w, h) {
  ctx.clearRect(0, 0, w, h);
  ctx.strokeStyle = "#ddd";
  ctx.beginPath();
  ctx.moveTo(0, h / 2); ctx.lineTo(w, h / 2);
  ctx.moveTo(w / 2, 0); ctx.lineTo(w / 2, h);
  ctx.stroke();
}

function polyline(ctx, pts, color) {
  ctx.strokeStyle = color;
  ctx.beginPath();
  pts.forEach(([x, y], i) => (i ? ctx.lineTo(x, y) : ctx.moveTo(x, y)));
  ctx.stroke();
}

function drawOrbit(rows) {
  const c = $("orbit"), ctx = c.getContext("2d");
  axes(ctx, c.width, c.height);
  let r = 1e-9;
  for (let i = 0; i < rows.length; i += 6) {
    r = Math.max(r, Math.abs(rows[i + 1]), Math.abs(rows[i + 2]), Math.abs(rows[i + 3]), Math.abs(rows[i + 4]));
  }
  const s = (0.45 * c.width) / r;
  const cl = [], qf = [];
  for (let i = 0; i < rows.length; i += 6) {
    cl.push([c.width / 2 + s * rows[i + 1], c.height / 2 - s * rows[i + 2]]);
    qf.push([c.width / 2 + s * rows[i + 3], c.height / 2 - s * rows[i + 4]]);
  }
  polyline(ctx, cl, "#999");
  polyline(ctx, qf, "#1565c0");
}

function drawOnset(rows) {
  const c = $("onset"), ctx = c.getContext("2d");
  ctx.clearRect(0, 0, c.width, c.height);
  const tMax = rows[rows.length - 3] || 1;
  let top = 1e-12;
  for (let i = 0; i < rows.length; i += 3) top = Math.max(top, Math.abs(rows[i + 1] - 1));
  const pts = [];
  for (let i = 0; i < rows.length; i += 3) {
    pts.push([(rows[i] / tMax) * c.width, c.height - 10 - ((rows[i + 1] - 1) / top) * (c.height - 20)]);
  }
  polyline(ctx, pts, "#c62828");
  ctx.fillStyle = "#333";
  ctx.fillText(`max |C_t − 1| = ${top.toExponential(3)}`, 6, 14);
}

function drawMap(values, n) {
  const c = $("map"), ctx = c.getContext("2d");
  const img = ctx.createImageData(n, n);
  const top = Math.max(...values, 1e-300);
  for (let ip = 0; ip < n; ip++) {
    for (let iq = 0; iq < n; iq++) {
      const v = Math.sqrt(values[ip * n + iq] / top);
      const k = 4 * ((n - 1 - ip) * n + iq);
      img.data[k] = 255 * v; img.data[k + 1] = 80 * v; img.data[k + 2] = 255 * (1 - v); img.data[k + 3] = 255;
    }
  }
  const tmp = document.createElement("canvas");
  tmp.width = tmp.height = n;
  tmp.getContext("2d").putImageData(img, 0, 0);
  ctx.imageSmoothingEnabled = false;
  ctx.drawImage(tmp, 0, 0, c.width, c.height);
  ctx.fillStyle = "#fff";
  ctx.fillText(`max = ${top.toExponential(3)}`, 6, 14);
}

function render() {
  const family = $("family").value, k = num("strength"), h = num("hbar"), tMax = num("tmax");
  $("error").textContent = "";
  try {
    const t0 = performance.now();
    drawOrbit(quasiFlowCurve(family, k, h, num("bre"), num("bim"), tMax, 400));
    drawOnset(cosineOnset(family, k, h, num("alpha"), num("q"), tMax, 200));
    const n = 96;
    drawMap(deformationMap(family, k, h, num("tmap"), num("extent"), n), n);
    $("status").textContent = `rendered in ${(performance.now() - t0).toFixed(1)} ms`;
  } catch (e) {
    $("error").textContent = String(e.message ?? e);
  }
}

await init();
document.querySelectorAll("input, select").forEach((el) => el.addEventListener("input", render));
render();
