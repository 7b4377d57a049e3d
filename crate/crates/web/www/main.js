import init, {
  Session, problem_names, scenario_density, scenario_spectrum, frequency_bank, bank_wave,
} from "./pkg/fourier_topo_web.js";

const $ = (id) => document.getElementById(id);
const num = (id) => Number($(id).value);
const SCALE = 4;

function showError(e) {
  $("error").textContent = String(e);
}

function paint(canvas, rgba, w, h) {
  canvas.width = w;
  canvas.height = h;
  canvas.getContext("2d").putImageData(new ImageData(new Uint8ClampedArray(rgba), w, h), 0, 0);
}

function plot(canvas, xs, ys, { color = "#222", bars = false, yMax } = {}) {
  const ctx = canvas.getContext("2d");
  const { width: w, height: h } = canvas;
  ctx.clearRect(0, 0, w, h);
  const x0 = xs[0], x1 = xs[xs.length - 1] || 1;
  const top = yMax ?? Math.max(...ys, 1e-12);
  const px = (x) => 4 + (x - x0) / (x1 - x0 || 1) * (w - 8);
  const py = (y) => h - 4 - y / top * (h - 8);
  ctx.strokeStyle = color;
  ctx.beginPath();
  xs.forEach((x, i) => {
    if (bars) {
      ctx.moveTo(px(x), py(0));
      ctx.lineTo(px(x), py(ys[i]));
    } else if (i === 0) {
      ctx.moveTo(px(x), py(ys[i]));
    } else {
      ctx.lineTo(px(x), py(ys[i]));
    }
  });
  ctx.stroke();
}

// optimizer

let session = null;
let running = false;

function renderSession() {
  const w = session.width(SCALE), h = session.height(SCALE);
  paint($("design"), session.render(SCALE), w, h);
  const c = session.compliance_history();
  plot($("curve"), c.map((_, i) => i), c);
  const [comp, frac, gray, alpha, p] = session.stats();
  $("stats").textContent =
    `epoch ${session.epoch()}  compliance ${comp.toFixed(3)}\n` +
    `fraction ${frac.toFixed(4)}  gray ${gray.toFixed(4)}\n` +
    `alpha ${alpha.toFixed(1)}  p ${p.toFixed(2)}` +
    (session.converged() ? "\nconverged" : "");
}

function tick() {
  if (!running) return;
  try {
    const done = session.step(2);
    renderSession();
    if (done) {
      running = false;
      $("pause").disabled = true;
      return;
    }
  } catch (e) {
    running = false;
    showError(e);
    return;
  }
  requestAnimationFrame(tick);
}

$("start").onclick = () => {
  showError("");
  try {
    if (session) session.free();
    session = new Session(
      $("problem").value, num("target"), num("lmin"), num("lmax"), num("nf"), num("solids"), num("seed"),
    );
  } catch (e) {
    session = null;
    showError(e);
    return;
  }
  running = true;
  $("pause").disabled = false;
  $("pause").textContent = "Pause";
  requestAnimationFrame(tick);
};

$("pause").onclick = () => {
  running = !running;
  $("pause").textContent = running ? "Pause" : "Resume";
  if (running) requestAnimationFrame(tick);
};

// one-dimensional scenario

function drawScenario() {
  const args = ["w1", "w2", "w3", "f1", "f2"].map(num);
  try {
    const n = 1024;
    const rho = scenario_density(...args, n);
    plot($("density1d"), Array.from(rho, (_, i) => 2 * i / n), Array.from(rho), { yMax: 1 });
    const flat = scenario_spectrum(...args, n);
    const f = [], a = [];
    for (let i = 2; i < flat.length; i += 2) {
      if (flat[i] > 16) break;
      f.push(flat[i]);
      a.push(flat[i + 1]);
    }
    plot($("spectrum1d"), f, a, { bars: true, color: "#2050c0" });
    showError("");
  } catch (e) {
    showError(e);
  }
}

// frequency bank

let bankPoints = [];

function bankArgs() {
  return [num("bank-lmin"), num("bank-lmax"), num("bank-nf"), num("bank-seed")];
}

function drawBank() {
  const canvas = $("bank");
  const ctx = canvas.getContext("2d");
  const { width: w, height: h } = canvas;
  ctx.clearRect(0, 0, w, h);
  let flat;
  try {
    flat = frequency_bank(...bankArgs());
    showError("");
  } catch (e) {
    showError(e);
    return;
  }
  const [lmin, lmax] = bankArgs();
  const fmax = 1 / lmin;
  const s = (w / 2 - 10) / fmax;
  ctx.strokeStyle = "#ddd";
  ctx.strokeRect(w / 2 - s / lmax, h / 2 - s / lmax, 2 * s / lmax, 2 * s / lmax);
  ctx.strokeRect(w / 2 - s * fmax, h / 2 - s * fmax, 2 * s * fmax, 2 * s * fmax);
  bankPoints = [];
  ctx.fillStyle = "#c02020";
  for (let i = 0; i < flat.length; i += 2) {
    const x = w / 2 + flat[i] * s, y = h / 2 - flat[i + 1] * s;
    bankPoints.push([x, y]);
    ctx.beginPath();
    ctx.arc(x, y, 2.5, 0, 2 * Math.PI);
    ctx.fill();
  }
}

$("bank").onclick = (ev) => {
  const r = ev.target.getBoundingClientRect();
  const x = ev.clientX - r.left, y = ev.clientY - r.top;
  let best = -1, dist = Infinity;
  bankPoints.forEach(([px, py], i) => {
    const d = (px - x) ** 2 + (py - y) ** 2;
    if (d < dist) { dist = d; best = i; }
  });
  if (best < 0) return;
  const [lmin, lmax, nf, seed] = bankArgs();
  try {
    paint($("wave"), bank_wave(lmin, lmax, nf, seed, best, 160, 2 * lmax), 160, 160);
    const f = frequency_bank(lmin, lmax, nf, seed);
    $("bank-info").textContent =
      `column ${best}\nf = (${f[2 * best].toFixed(4)}, ${f[2 * best + 1].toFixed(4)})\nwindow ${2 * lmax} x ${2 * lmax}`;
  } catch (e) {
    showError(e);
  }
};

await init();
for (const name of problem_names().split(",")) {
  $("problem").append(new Option(name, name));
}
for (const id of ["w1", "w2", "w3", "f1", "f2"]) $(id).oninput = drawScenario;
for (const id of ["bank-lmin", "bank-lmax", "bank-nf", "bank-seed"]) $(id).oninput = drawBank;
drawScenario();
drawBank();
