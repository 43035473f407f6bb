import init, { couplings, g_eff_hz, trajectory, cat } from "./pkg/optomech_web.js";

const $ = (id) => document.getElementById(id);

function axes(ctx, w, h, pad, xr, yr) {
  const sx = (x) => pad + ((x - xr[0]) / (xr[1] - xr[0])) * (w - 2 * pad);
  const sy = (y) => h - pad - ((y - yr[0]) / (yr[1] - yr[0])) * (h - 2 * pad);
  ctx.clearRect(0, 0, w, h);
  ctx.strokeStyle = "#999";
  ctx.strokeRect(pad, pad, w - 2 * pad, h - 2 * pad);
  ctx.fillStyle = "#444";
  ctx.font = "11px sans-serif";
  ctx.fillText(xr[0].toPrecision(3), pad, h - pad + 14);
  ctx.fillText(xr[1].toPrecision(3), w - pad - 30, h - pad + 14);
  ctx.fillText(yr[1].toPrecision(3), 2, pad + 4);
  ctx.fillText(yr[0].toPrecision(3), 2, h - pad);
  return { sx, sy };
}

function line(ctx, pts, sx, sy, color) {
  ctx.strokeStyle = color;
  ctx.lineWidth = 1.5;
  ctx.beginPath();
  pts.forEach(([x, y], i) => (i ? ctx.lineTo(sx(x), sy(y)) : ctx.moveTo(sx(x), sy(y))));
  ctx.stroke();
}

function show(id, text, isError = false) {
  const el = $(id);
  el.textContent = text;
  el.className = isError ? "out err" : "out";
}

function drawCoupling() {
  const asym = +$("asym").value;
  const field = +$("field").value;
  $("asym-v").textContent = asym.toFixed(3);
  $("field-v").textContent = field.toFixed(1);
  const c = $("coupling");
  const ctx = c.getContext("2d");
  try {
    const rows = couplings(asym, field * 1e-3, 1001, $("comp").checked);
    const pts = [];
    for (let i = 0; i < rows.length; i += 4) pts.push([rows[i], rows[i + 1] / 1e6]);
    if (pts.length === 0) throw new Error("no flux value is reachable");
    const ys = pts.map((p) => p[1]);
    const lo = Math.min(...ys, 0);
    const hi = Math.max(...ys, 0);
    const { sx, sy } = axes(ctx, c.width, c.height, 40, [0, 0.5], [lo, hi || 1]);
    line(ctx, [[0, 0], [0.5, 0]], sx, sy, "#ccc");
    line(ctx, pts, sx, sy, "#1f5fbf");
    const peak = pts.reduce((a, b) => (Math.abs(b[1]) > Math.abs(a[1]) ? b : a));
    show("coupling-out", `g0/2π in MHz; largest |g0| = ${Math.abs(peak[1]).toFixed(3)} MHz at Φ_M = ${peak[0].toFixed(3)} (${pts.length} reachable points)`);
  } catch (e) {
    ctx.clearRect(0, 0, c.width, c.height);
    show("coupling-out", String(e.message ?? e), true);
  }
}

function drawTrajectory() {
  const flux = +$("tflux").value;
  const cycles = +$("tcyc").value;
  $("tflux-v").textContent = flux.toFixed(4);
  $("tcyc-v").textContent = cycles.toFixed(2);
  const c = $("traj");
  const ctx = c.getContext("2d");
  try {
    const g = g_eff_hz(flux);
    const rows = trajectory(flux, cycles, 400);
    const pts = [];
    for (let i = 0; i < rows.length; i += 3) pts.push([rows[i + 1], rows[i + 2]]);
    const r = Math.max(2.2 * Math.abs(g) / 1e6, 0.1);
    const { sx, sy } = axes(ctx, c.width, c.height, 40, [-r, r], [-r, r]);
    line(ctx, [[-r, 0], [r, 0]], sx, sy, "#ddd");
    line(ctx, [[0, -r], [0, r]], sx, sy, "#ddd");
    line(ctx, pts, sx, sy, "#bf3f1f");
    const [bx, by] = pts[pts.length - 1];
    ctx.fillStyle = "#bf3f1f";
    ctx.beginPath();
    ctx.arc(sx(bx), sy(by), 4, 0, 2 * Math.PI);
    ctx.fill();
    show("traj-out", `g_eff/2π = ${(g / 1e6).toFixed(4)} MHz, |β| at the end = ${Math.hypot(bx, by).toFixed(3)}, largest |β| = ${(2 * Math.abs(g) / 1e6).toFixed(3)}`);
  } catch (e) {
    ctx.clearRect(0, 0, c.width, c.height);
    show("traj-out", String(e.message ?? e), true);
  }
}

function colour(v, scale) {
  const t = Math.max(-1, Math.min(1, v / scale));
  const a = Math.round(255 * (1 - Math.abs(t)));
  return t >= 0 ? [255, a, a] : [a, a, 255];
}

function runCat() {
  const c = $("wig");
  const ctx = c.getContext("2d");
  show("cat-out", "running...");
  setTimeout(() => {
    try {
      const n = 101;
      const t0 = performance.now();
      const d = cat(+$("cflux").value, +$("ccyc").value, +$("cnm").value, n);
      const w = d.wigner;
      const img = ctx.createImageData(n, n);
      const scale = 1 / Math.PI;
      for (let ip = 0; ip < n; ip++) {
        for (let ix = 0; ix < n; ix++) {
          const [r, g, b] = colour(w[ip * n + ix], scale);
          const k = 4 * ((n - 1 - ip) * n + ix);
          img.data.set([r, g, b, 255], k);
        }
      }
      const off = new OffscreenCanvas(n, n);
      off.getContext("2d").putImageData(img, 0, 0);
      ctx.imageSmoothingEnabled = false;
      ctx.clearRect(0, 0, c.width, c.height);
      ctx.drawImage(off, 0, 0, c.width, c.height);
      const min = Math.min(...w);
      const x = d.axis_x;
      const p = d.axis_p;
      const warn = d.truncation_warning ? "; grid reaches past the phonon cutoff" : "";
      show(
        "cat-out",
        `β = ${d.beta_re.toFixed(3)} ${d.beta_im >= 0 ? "+" : "-"} ${Math.abs(d.beta_im).toFixed(3)}i, p(0) = ${d.p0.toFixed(4)}, ` +
          `fidelity with the even cat = ${d.fidelity.toFixed(4)}, min W = ${min.toFixed(3)}, ` +
          `x ∈ [${x[0].toFixed(2)}, ${x[x.length - 1].toFixed(2)}], p ∈ [${p[0].toFixed(2)}, ${p[p.length - 1].toFixed(2)}], ` +
          `${(performance.now() - t0).toFixed(0)} ms${warn}`,
      );
      d.free();
    } catch (e) {
      ctx.clearRect(0, 0, c.width, c.height);
      show("cat-out", String(e.message ?? e), true);
    }
  }, 10);
}

await init();
for (const id of ["asym", "field", "comp"]) $(id).addEventListener("input", drawCoupling);
for (const id of ["tflux", "tcyc"]) $(id).addEventListener("input", drawTrajectory);
$("crun").addEventListener("click", runCat);
drawCoupling();
drawTrajectory();
runCat();
