import init, { plan_report, level_counts, enumerate, decode_set } from "./pkg/antichain_web.js";

const $ = (id) => document.getElementById(id);

function family() {
  return document.querySelector("input[name=family]:checked").value;
}

function param() {
  return Number($("param").value);
}

function verdict(cert) {
  const cls = cert.verdict === "pass" ? "pass" : "fail";
  const values = Object.entries(cert.values).map(([k, v]) => `${k} = ${v}`).join(", ");
  const witness = cert.witness ? ` witness ${JSON.stringify(cert.witness)}` : "";
  return `<p class="${cls}"><b>${cert.verdict.toUpperCase()}</b> ${cert.kind} [${cert.scope}] ${values}${witness}</p>`;
}

function guarded(target, f) {
  try {
    f();
  } catch (e) {
    $(target).innerHTML = `<p class="fail">${e}</p>`;
  }
}

function showPlan() {
  guarded("plan-out", () => {
    const report = JSON.parse(plan_report(family(), param(), Number($("plan-n").value)));
    const rows = report.rows
      .map((r) => `<tr><td>${r.k}</td><td>${r.ell}</td><td>${r.a}</td><td>${r.s}</td></tr>`)
      .join("");
    $("plan-out").innerHTML =
      `<p>${report.family}</p>` +
      `<table><tr><th>k</th><th>ℓ<sub>k</sub></th><th>a<sub>k</sub></th><th>s<sub>k</sub></th></tr>${rows}</table>` +
      verdict(report.certificate);
  });
}

function plot(rows) {
  const canvas = $("plot");
  const ctx = canvas.getContext("2d");
  const W = canvas.width, H = canvas.height, pad = 44;
  ctx.clearRect(0, 0, W, H);
  const series = [
    ["log2_bound_density", "#888"],
    ["log2_f_density", "#c9711a"],
    ["log2_count_density", "#1f5fbf"],
  ];
  const ys = rows.flatMap((r) => series.map(([key]) => r[key]).filter((v) => v !== null));
  const xmin = rows[0].n, xmax = rows[rows.length - 1].n;
  const ymin = Math.min(...ys), ymax = Math.max(0, ...ys);
  const sx = (n) => pad + ((n - xmin) / Math.max(1, xmax - xmin)) * (W - 2 * pad);
  const sy = (v) => H - pad - ((v - ymin) / Math.max(1e-9, ymax - ymin)) * (H - 2 * pad);

  ctx.strokeStyle = "#bbb";
  ctx.fillStyle = "#555";
  ctx.font = "11px sans-serif";
  ctx.beginPath();
  ctx.moveTo(pad, pad / 2);
  ctx.lineTo(pad, H - pad);
  ctx.lineTo(W - pad / 2, H - pad);
  ctx.stroke();
  for (let t = 0; t <= 4; t++) {
    const v = ymin + ((ymax - ymin) * t) / 4;
    ctx.fillText(v.toFixed(1), 4, sy(v) + 4);
    const n = Math.round(xmin + ((xmax - xmin) * t) / 4);
    ctx.fillText(String(n), sx(n) - 8, H - pad + 16);
  }

  for (const [key, color] of series) {
    ctx.strokeStyle = color;
    ctx.lineWidth = key === "log2_count_density" ? 2 : 1.2;
    ctx.beginPath();
    let started = false;
    for (const r of rows) {
      if (r[key] === null) continue;
      const x = sx(r.n), y = sy(r[key]);
      if (started) ctx.lineTo(x, y);
      else ctx.moveTo(x, y);
      started = true;
    }
    ctx.stroke();
  }
}

function showCounts() {
  guarded("count-out", () => {
    const rows = JSON.parse(level_counts(family(), param(), Number($("count-n").value)));
    plot(rows);
    const last = rows[rows.length - 1];
    $("count-out").innerHTML = `<p>|F ∩ 2<sup>[${last.n}]</sup>| = ${last.count}</p>`;
  });
}

function showMembers() {
  guarded("enum-out", () => {
    const result = JSON.parse(enumerate(family(), param(), Number($("enum-n").value)));
    $("enum-out").innerHTML = `<p>${result.elements.length} sets</p>` + verdict(result.certificate);
    $("sets").textContent = result.elements
      .map((e) => `k=${e.k} i=${e.i}  {${e.set.join(",")}}`)
      .join("\n");
  });
}

function showDecode() {
  guarded("decode-out", () => {
    const d = JSON.parse(decode_set(family(), param(), $("decode-set").value));
    $("decode-out").textContent = d.member ? `member of block k=${d.k}, i=${d.i}` : "not a member";
  });
}

function defaultParam() {
  $("param").value = { constant: 3, corollary: 1, random: 0 }[family()];
}

await init();
$("plan-go").onclick = showPlan;
$("count-go").onclick = showCounts;
$("enum-go").onclick = showMembers;
$("decode-go").onclick = showDecode;
for (const radio of document.querySelectorAll("input[name=family]")) {
  radio.onchange = () => {
    defaultParam();
    showPlan();
    showCounts();
  };
}
showPlan();
showCounts();
showMembers();
