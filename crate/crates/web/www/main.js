import init, { track_roots, weak_norm_explorer, cover_demo } from './pkg/rootreg_web.js';

const $ = (id) => document.getElementById(id);
const COLORS = ['#1f77b4', '#d62728', '#2ca02c', '#ff7f0e', '#9467bd', '#8c564b', '#e377c2', '#17becf'];

function axes(ctx, w, h) {
  ctx.clearRect(0, 0, w, h);
  ctx.strokeStyle = '#999';
  ctx.strokeRect(0.5, 0.5, w - 1, h - 1);
}

// maps data bounds to a canvas box with a margin
function scaler(lo, hi, a, b) {
  const span = hi - lo || 1;
  return (v) => a + (v - lo) / span * (b - a);
}

function drawTrack() {
  const res = JSON.parse(track_roots(+$('tr-n').value, $('tr-family').value, +$('tr-gamma').value, +$('tr-points').value));
  const c = $('tr-canvas'), ctx = c.getContext('2d');
  axes(ctx, c.width, c.height);
  if (res.error) { $('tr-out').textContent = res.error; return; }
  // left: the root curves in the plane, right: real parts against t
  const half = c.width / 2;
  let m = 0;
  for (const b of res.branches) for (const [x, y] of b) m = Math.max(m, Math.abs(x), Math.abs(y));
  m = m || 1;
  const px = scaler(-m, m, 20, half - 20), py = scaler(-m, m, c.height - 20, 20);
  const tx = scaler(0, 1, half + 20, c.width - 20);
  res.branches.forEach((b, i) => {
    ctx.strokeStyle = COLORS[i % COLORS.length];
    ctx.beginPath();
    b.forEach(([x, y], k) => (k ? ctx.lineTo(px(x), py(y)) : ctx.moveTo(px(x), py(y))));
    ctx.stroke();
    ctx.beginPath();
    b.forEach(([x], k) => (k ? ctx.lineTo(tx(res.grid[k]), py(x)) : ctx.moveTo(tx(res.grid[k]), py(x))));
    ctx.stroke();
  });
  ctx.fillStyle = '#333';
  ctx.fillText('roots in C', 26, 16);
  ctx.fillText('Re root vs t', half + 26, 16);
  $('tr-out').textContent = `${res.grid.length} points, max step jump ${res.max_step_jump.toExponential(3)}, ${res.refinements} refinements`;
}

function drawWeak() {
  const a = +$('wk-a').value, p = +$('wk-p').value;
  $('wk-a-val').textContent = a.toFixed(2);
  $('wk-p-val').textContent = p.toFixed(2);
  const res = JSON.parse(weak_norm_explorer(a, p, +$('wk-depth').value));
  const c = $('wk-canvas'), ctx = c.getContext('2d');
  axes(ctx, c.width, c.height);
  if (res.error) { $('wk-out').textContent = res.error; return; }
  const rs = res.curve.map((q) => Math.log10(q[0]));
  const top = Math.max(...res.curve.map((q) => q[1])) || 1;
  const x = scaler(Math.min(...rs), Math.max(...rs), 20, c.width - 20), y = scaler(0, top * 1.1, c.height - 20, 20);
  ctx.strokeStyle = COLORS[0];
  ctx.beginPath();
  res.curve.forEach(([r, v], k) => (k ? ctx.lineTo(x(Math.log10(r)), y(v)) : ctx.moveTo(x(Math.log10(r)), y(v))));
  ctx.stroke();
  ctx.strokeStyle = COLORS[1];
  ctx.setLineDash([4, 4]);
  ctx.beginPath();
  if (res.weak_lp != null) {
    ctx.moveTo(20, y(res.weak_lp));
    ctx.lineTo(c.width - 20, y(res.weak_lp));
  }
  ctx.stroke();
  ctx.setLineDash([]);
  ctx.fillStyle = '#333';
  ctx.fillText('r |{f > r}|^{1/p} against log10 r', 26, 16);
  const ap = a * p;
  const regime = ap < 1 - 1e-9 ? 'in L^p' : Math.abs(ap - 1) <= 1e-9 ? 'borderline: weak L^p only' : 'not in weak L^p (grows with depth)';
  const fmt = (v) => (v == null || !isFinite(v) ? 'inf' : v.toPrecision(6));
  $('wk-out').textContent = `L^p ${fmt(res.lp)}   weak L^p ${fmt(res.weak_lp)}   a p = ${ap.toFixed(3)} (${regime})`;
}

function drawCover() {
  const res = JSON.parse(cover_demo(+$('cv-rate').value, +$('cv-d').value, +$('cv-k').value, $('cv-vanishing').value));
  const c = $('cv-canvas'), ctx = c.getContext('2d');
  axes(ctx, c.width, c.height);
  if (res.error) { $('cv-out').textContent = res.error; return; }
  const x = scaler(0, 1, 20, c.width - 20);
  const rows = 2;
  res.intervals.forEach(([a, b, t1, second], i) => {
    const yy = 30 + (i % rows) * 40;
    ctx.strokeStyle = second ? COLORS[1] : COLORS[0];
    ctx.lineWidth = 3;
    ctx.beginPath();
    ctx.moveTo(x(Math.max(a, 0)), yy);
    ctx.lineTo(x(Math.min(b, 1)), yy);
    ctx.stroke();
    ctx.fillStyle = '#333';
    ctx.fillRect(x(t1) - 1, yy - 4, 2, 8);
  });
  ctx.lineWidth = 1;
  $('cv-out').textContent = `${res.intervals.length} intervals, max overlap ${res.max_overlap}, total length ${res.total_length.toFixed(4)}`;
}

await init();
for (const id of ['tr-n', 'tr-family', 'tr-gamma', 'tr-points']) $(id).addEventListener('change', drawTrack);
for (const id of ['wk-a', 'wk-p', 'wk-depth']) $(id).addEventListener('input', drawWeak);
for (const id of ['cv-rate', 'cv-d', 'cv-k', 'cv-vanishing']) $(id).addEventListener('change', drawCover);
drawTrack();
drawWeak();
drawCover();
