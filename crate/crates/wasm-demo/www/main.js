import init, { basis_curves, convergence_sweep, domain_names, solve_field } from "./pkg/iga_sipg_wasm_demo.js";

const $ = (id) => document.getElementById(id);
const num = (id) => Number($(id).value);

function drawBasis() {
  const canvas = $("basis-canvas");
  const ctx = canvas.getContext("2d");
  ctx.clearRect(0, 0, canvas.width, canvas.height);
  const samples = 400;
  let values;
  try {
    values = basis_curves(num("basis-degree"), num("basis-intervals"), samples);
  } catch (e) {
    ctx.fillText(String(e), 10, 20);
    return;
  }
  const count = values.length / samples;
  const pad = 10;
  const w = canvas.width - 2 * pad;
  const h = canvas.height - 2 * pad;
  for (let f = 0; f < count; f++) {
    ctx.strokeStyle = `hsl(${(360 * f) / count}, 70%, 45%)`;
    ctx.beginPath();
    for (let s = 0; s < samples; s++) {
      const x = pad + (w * s) / (samples - 1);
      const y = pad + h * (1 - values[f * samples + s]);
      s === 0 ? ctx.moveTo(x, y) : ctx.lineTo(x, y);
    }
    ctx.stroke();
  }
}

function color(t) {
  return `hsl(${240 - 240 * t}, 80%, 50%)`;
}

function drawField() {
  const canvas = $("solve-canvas");
  const ctx = canvas.getContext("2d");
  const info = $("solve-info");
  ctx.clearRect(0, 0, canvas.width, canvas.height);
  let field;
  try {
    field = solve_field($("solve-domain").value, $("solve-solution").value, num("solve-degree"), num("solve-level"), 24);
  } catch (e) {
    info.textContent = String(e);
    info.className = "error";
    return;
  }
  const pts = field.points();
  const vals = field.values();
  const r = field.resolution;
  info.className = "";
  info.textContent = `N = ${field.dofs}, error in the dG norm = ${field.error.toExponential(4)}`;

  let [x0, x1, y0, y1] = [Infinity, -Infinity, Infinity, -Infinity];
  for (let i = 0; i < pts.length; i += 2) {
    x0 = Math.min(x0, pts[i]); x1 = Math.max(x1, pts[i]);
    y0 = Math.min(y0, pts[i + 1]); y1 = Math.max(y1, pts[i + 1]);
  }
  const vmin = Math.min(...vals);
  const vmax = Math.max(...vals);
  const scale = (canvas.width - 20) / Math.max(x1 - x0, y1 - y0);
  const px = (i) => [10 + (pts[2 * i] - x0) * scale, canvas.height - 10 - (pts[2 * i + 1] - y0) * scale];

  for (let k = 0; k < field.patches; k++) {
    const base = k * r * r;
    for (let j = 0; j + 1 < r; j++) {
      for (let i = 0; i + 1 < r; i++) {
        const ids = [base + j * r + i, base + j * r + i + 1, base + (j + 1) * r + i + 1, base + (j + 1) * r + i];
        const v = ids.reduce((a, id) => a + vals[id], 0) / 4;
        ctx.fillStyle = color(vmax > vmin ? (v - vmin) / (vmax - vmin) : 0.5);
        ctx.beginPath();
        ids.forEach((id, n) => (n === 0 ? ctx.moveTo(...px(id)) : ctx.lineTo(...px(id))));
        ctx.closePath();
        ctx.fill();
      }
    }
  }
  field.free();
}

function runSweep() {
  const table = $("sweep-table");
  let rows;
  try {
    rows = convergence_sweep($("sweep-domain").value, "sine", num("sweep-degree"), num("sweep-levels"));
  } catch (e) {
    table.innerHTML = `<tr><td class="error">${e}</td></tr>`;
    return;
  }
  let html = "<tr><th>level</th><th>N</th><th>error</th><th>rate</th></tr>";
  for (let i = 0; i < rows.length; i += 3) {
    const rate = Number.isNaN(rows[i + 2]) ? "" : rows[i + 2].toFixed(3);
    html += `<tr><td>${i / 3 + 1}</td><td>${rows[i]}</td><td>${rows[i + 1].toExponential(4)}</td><td>${rate}</td></tr>`;
  }
  table.innerHTML = html;
}

await init();
for (const id of ["solve-domain", "sweep-domain"]) {
  for (const name of domain_names().split(",")) {
    const opt = document.createElement("option");
    opt.textContent = name;
    $(id).appendChild(opt);
  }
}
$("solve-domain").value = "square2";
$("sweep-domain").value = "square2";
$("basis-degree").addEventListener("input", drawBasis);
$("basis-intervals").addEventListener("input", drawBasis);
$("solve-run").addEventListener("click", drawField);
$("sweep-run").addEventListener("click", runSweep);
drawBasis();
drawField();
