import init, { generate_graph, density_curve, convergence_curve } from "./pkg/nugg_wasm.js";

const $ = (id) => document.getElementById(id);
const num = (id) => Number($(id).value);

function status(id, text, isError = false) {
  const el = $(id);
  el.textContent = text;
  el.className = isError ? "status error" : "status";
}

// Viridis-like ramp on [0, 1].
function ramp(t) {
  const stops = [[68, 1, 84], [59, 82, 139], [33, 145, 140], [94, 201, 98], [253, 231, 37]];
  const x = Math.min(Math.max(t, 0), 1) * (stops.length - 1);
  const i = Math.min(Math.floor(x), stops.length - 2);
  const f = x - i;
  const c = stops[i].map((v, k) => Math.round(v + f * (stops[i + 1][k] - v)));
  return `rgb(${c[0]},${c[1]},${c[2]})`;
}

function drawGraph(g) {
  const cv = $("graph");
  const ctx = cv.getContext("2d");
  const s = cv.width / 2 - 12;
  const px = ([x, y]) => [cv.width / 2 + s * x, cv.height / 2 - s * y];
  ctx.clearRect(0, 0, cv.width, cv.height);
  ctx.strokeStyle = "#bbb";
  ctx.beginPath();
  ctx.arc(cv.width / 2, cv.height / 2, s, 0, 2 * Math.PI);
  ctx.stroke();
  ctx.strokeStyle = "rgba(40, 40, 40, 0.12)";
  ctx.lineWidth = 0.6;
  ctx.beginPath();
  for (const [i, j] of g.edges) {
    const [x0, y0] = px(g.xy[i]);
    const [x1, y1] = px(g.xy[j]);
    ctx.moveTo(x0, y0);
    ctx.lineTo(x1, y1);
  }
  ctx.stroke();
  const dmax = Math.max(1, ...g.degree);
  g.xy.forEach((p, i) => {
    const [x, y] = px(p);
    ctx.fillStyle = g.hub[i] ? "#d62728" : ramp(g.degree[i] / dmax);
    ctx.beginPath();
    ctx.arc(x, y, g.hub[i] ? 4.5 : 2.2, 0, 2 * Math.PI);
    ctx.fill();
  });
}

function axes(ctx, cv, pad) {
  ctx.strokeStyle = "#888";
  ctx.lineWidth = 1;
  ctx.beginPath();
  ctx.moveTo(pad, 8);
  ctx.lineTo(pad, cv.height - pad);
  ctx.lineTo(cv.width - 8, cv.height - pad);
  ctx.stroke();
}

function drawDensity(curve, g, thetas) {
  const cv = $("density-plot");
  const ctx = cv.getContext("2d");
  const pad = 32;
  ctx.clearRect(0, 0, cv.width, cv.height);
  axes(ctx, cv, pad);
  const est = g && g.rho_hat ? g.rho_hat.map((r) => (r == null ? null : r / (2 * Math.PI))) : [];
  const finite = est.filter((v) => v != null && Number.isFinite(v));
  const sorted = [...finite].sort((a, b) => a - b);
  const cap = sorted.length ? sorted[Math.floor(0.99 * (sorted.length - 1))] : 0;
  const ymax = 1.1 * Math.max(...curve.f, cap);
  const X = (t) => pad + ((t + Math.PI) / (2 * Math.PI)) * (cv.width - pad - 8);
  const Y = (v) => cv.height - pad - (v / ymax) * (cv.height - pad - 8);
  ctx.fillStyle = "rgba(31, 119, 180, 0.35)";
  est.forEach((v, i) => {
    if (v == null || v > ymax) return;
    ctx.fillRect(X(thetas[i]) - 1, Y(v) - 1, 2, 2);
  });
  ctx.strokeStyle = "#111";
  ctx.lineWidth = 2;
  ctx.beginPath();
  curve.theta.forEach((t, k) => (k ? ctx.lineTo(X(t), Y(curve.f[k])) : ctx.moveTo(X(t), Y(curve.f[k]))));
  ctx.stroke();
  ctx.fillStyle = "#444";
  ctx.fillText("-pi", pad - 6, cv.height - pad + 14);
  ctx.fillText("pi", cv.width - 20, cv.height - pad + 14);
  ctx.fillText(ymax.toFixed(2), 2, 14);
}

function sample() {
  try {
    const density = $("density").value;
    const g = JSON.parse(
      generate_graph($("space").value, num("radius"), density, num("n"), num("alpha"), num("hubs"), num("seed"))
    );
    drawGraph(g);
    const thetas = g.xy.map(([x, y]) => Math.atan2(y, x));
    drawDensity(JSON.parse(density_curve(density, 400)), g, thetas);
    status("graph-status", `alpha ${g.alpha.toFixed(4)}, ${g.edges.length} edges, mean degree ${g.mean_degree.toFixed(2)}`);
  } catch (err) {
    status("graph-status", String(err.message || err), true);
  }
}

function drawConvergence(runs) {
  const cv = $("conv-plot");
  const ctx = cv.getContext("2d");
  const pad = 40;
  ctx.clearRect(0, 0, cv.width, cv.height);
  axes(ctx, cv, pad);
  const xs = runs.flatMap((r) => r.n_grid.map(Math.log10));
  const ys = runs.flatMap((r) => r.mse.map(Math.log10));
  const [x0, x1] = [Math.min(...xs), Math.max(...xs)];
  const [y0, y1] = [Math.min(...ys), Math.max(...ys)];
  const X = (v) => pad + ((v - x0) / (x1 - x0 || 1)) * (cv.width - pad - 16);
  const Y = (v) => cv.height - pad - ((v - y0) / (y1 - y0 || 1)) * (cv.height - pad - 16);
  runs.forEach((r, k) => {
    ctx.strokeStyle = ctx.fillStyle = k ? "#d62728" : "#1f77b4";
    ctx.lineWidth = 2;
    ctx.beginPath();
    r.n_grid.forEach((n, i) => {
      const [x, y] = [X(Math.log10(n)), Y(Math.log10(r.mse[i]))];
      i ? ctx.lineTo(x, y) : ctx.moveTo(x, y);
    });
    ctx.stroke();
    r.n_grid.forEach((n, i) => ctx.fillRect(X(Math.log10(n)) - 3, Y(Math.log10(r.mse[i])) - 3, 6, 6));
  });
  ctx.fillStyle = "#444";
  ctx.fillText(`N ${10 ** x0 | 0}`, pad, cv.height - pad + 16);
  ctx.fillText(`${10 ** x1 | 0}`, cv.width - 40, cv.height - pad + 16);
  ctx.fillText(`${(10 ** y1).toExponential(1)}`, 2, 14);
  ctx.fillText(`${(10 ** y0).toExponential(1)}`, 2, cv.height - pad);
}

function converge() {
  status("conv-status", "running...");
  // Let the status paint before the blocking call.
  setTimeout(() => {
    try {
      const args = [$("density").value, num("c-alpha"), $("grid").value, num("trials")];
      const seed = num("seed");
      const runs = ["true", "ignore"].map((mode) => JSON.parse(convergence_curve(...args, mode, seed)));
      drawConvergence(runs);
      status("conv-status", `fitted slope: corrected ${runs[0].slope.toFixed(3)}, ignored ${runs[1].slope.toFixed(3)}`);
    } catch (err) {
      status("conv-status", String(err.message || err), true);
    }
  }, 20);
}

await init();
$("sample").addEventListener("click", sample);
$("converge").addEventListener("click", converge);
sample();
