import init, { run_hadamard, density_slice, memory_table } from "./pkg/tucker_demo_wasm.js";

const $ = (id) => document.getElementById(id);
const colors = ["#1f77b4", "#d62728", "#2ca02c"];

function params() {
  return [+$("n").value, +$("terms").value, +$("seed").value, parseFloat($("eps").value)];
}

function guard(fn) {
  return () => {
    $("status").textContent = "";
    try {
      fn();
    } catch (e) {
      $("status").textContent = e.message ?? String(e);
    }
  };
}

// semilog plot of several positive series
function semilog(canvas, series, title) {
  const ctx = canvas.getContext("2d");
  const { width: w, height: h } = canvas;
  ctx.clearRect(0, 0, w, h);
  const pos = series.flat().filter((v) => v > 0);
  if (!pos.length) return;
  const lo = Math.floor(Math.log10(Math.min(...pos)));
  const hi = Math.ceil(Math.log10(Math.max(...pos)));
  const len = Math.max(...series.map((s) => s.length));
  const x = (i) => 40 + (i / Math.max(len - 1, 1)) * (w - 50);
  const y = (v) => 20 + ((hi - Math.log10(v)) / Math.max(hi - lo, 1)) * (h - 40);
  ctx.fillStyle = "#222";
  ctx.font = "12px sans-serif";
  ctx.fillText(title, 40, 14);
  for (let e = lo; e <= hi; e += Math.max(1, Math.round((hi - lo) / 6))) {
    ctx.fillText(`1e${e}`, 2, y(10 ** e) + 4);
  }
  series.forEach((s, m) => {
    ctx.strokeStyle = colors[m % colors.length];
    ctx.beginPath();
    s.forEach((v, i) => {
      if (v <= 0) return;
      i && s[i - 1] > 0 ? ctx.lineTo(x(i), y(v)) : ctx.moveTo(x(i), y(v));
    });
    ctx.stroke();
  });
}

function heat(canvas, values, n, logScale) {
  const img = new ImageData(n, n);
  const f = logScale ? (v) => Math.log10(Math.max(v, 1e-300)) : (v) => v;
  const mapped = values.map(f);
  const finite = mapped.filter(Number.isFinite);
  const lo = logScale ? Math.max(Math.min(...finite), Math.max(...finite) - 8) : Math.min(...finite);
  const hi = Math.max(...finite);
  mapped.forEach((v, p) => {
    const t = hi > lo ? Math.min(Math.max((v - lo) / (hi - lo), 0), 1) : 0;
    img.data.set([255 * t, 80 + 120 * t * (1 - t), 255 * (1 - t), 255], 4 * p);
  });
  const tmp = new OffscreenCanvas(n, n);
  tmp.getContext("2d").putImageData(img, 0, 0);
  const ctx = canvas.getContext("2d");
  ctx.imageSmoothingEnabled = false;
  ctx.drawImage(tmp, 0, 0, canvas.width, canvas.height);
  return [lo, hi];
}

const fmt = (v) => (v == null ? "-" : v.toExponential(2));

function run() {
  const rep = JSON.parse(run_hadamard(...params()));
  $("summary").textContent = [
    `input ranks     ${rep.input_ranks}   (rel. error ${fmt(rep.input_rel_error)})`,
    `hadamard ranks  ${rep.hadamard_ranks}`,
    `gram cross      ${rep.output_ranks}   rel. error ${fmt(rep.rel_error_cross)}   bound ${fmt(rep.error_bound)}`,
    `after ALS       ${rep.refined_ranks ?? "-"}   rel. error ${fmt(rep.rel_error_als)}`,
    `time            ${rep.timings.total.toFixed(3)} s`,
  ].join("\n");
  semilog($("spectra"), rep.modes.map((m) => m.eigenvalues), "Gram eigenvalues per mode");
  semilog($("history"), rep.modes.map((m) => m.err_history.map((e) => e / m.nrm)), "residual trace / initial trace");
}

function slice() {
  const [n] = params();
  const k = Math.min(+$("k").value, n - 1);
  const v = density_slice(...params(), k);
  const [, peak] = heat($("exact"), Array.from(v.slice(0, n * n)), n, false);
  const [lo, hi] = heat($("error"), Array.from(v.slice(n * n)), n, true);
  $("slicecap").textContent =
    `left: squared density at z index ${k} (peak ${peak.toExponential(2)}); ` +
    `right: log10 |error| of the truncated product, ${lo.toFixed(1)} .. ${hi.toFixed(1)}`;
}

function memory() {
  const rows = JSON.parse(memory_table($("ranks").value));
  const head = "<tr><th>r</th><th>d=3</th><th>d=4</th><th>d=5</th><th>d=6</th></tr>";
  const body = rows
    .map((r) => `<tr><td>${r.r}</td>${r.mb.map((v) => `<td>${v.toPrecision(4)}</td>`).join("")}</tr>`)
    .join("");
  $("memtable").innerHTML = `<table>${head}${body}</table><p>MB = 2<sup>20</sup> bytes, 8 bytes per entry.</p>`;
}

await init();
$("run").onclick = guard(run);
$("slice").onclick = guard(slice);
$("mem").onclick = guard(memory);
guard(memory)();
