"use strict";

const state = {
  session: null,
  width: 0,
  height: 0,
  tool: "mask-brush",
  radius: 6,
  zoom: 2,
  mask: null,          // Uint8Array, 1 = hole
  structure: null,     // ImageData of the editable structure, null until the first run
  structureDirty: false,
  undo: [],
  busy: false,
};
const UNDO_DEPTH = 50;

const $ = (id) => document.getElementById(id);
const sourceCanvas = $("source-canvas");
const maskCanvas = $("mask-canvas");
const structureCanvas = $("structure-canvas");

function toast(msg) {
  const t = $("toast");
  t.textContent = msg;
  t.style.display = "block";
  clearTimeout(toast.timer);
  toast.timer = setTimeout(() => (t.style.display = "none"), 4000);
}

async function api(method, path, body, type) {
  const opts = { method, body };
  if (type) opts.headers = { "Content-Type": type };
  const res = await fetch(path, opts);
  if (!res.ok) {
    let msg = res.status + " " + res.statusText;
    try { msg = (await res.json()).error || msg; } catch (_) {}
    throw new Error(msg);
  }
  return res;
}

function canvasBlob(canvas) {
  return new Promise((resolve) => canvas.toBlob(resolve, "image/png"));
}

function setZoom(z) {
  state.zoom = z;
  for (const c of [sourceCanvas, maskCanvas, structureCanvas]) {
    c.style.width = state.width * z + "px";
    c.style.height = state.height * z + "px";
  }
  $("editor").style.width = state.width * z + "px";
  $("editor").style.height = state.height * z + "px";
  for (const img of [$("flow-img"), $("result-img")]) img.style.width = state.width * z + "px";
}

function drawMask() {
  const ctx = maskCanvas.getContext("2d");
  const img = ctx.createImageData(state.width, state.height);
  for (let i = 0; i < state.mask.length; ++i) {
    if (!state.mask[i]) continue;
    img.data[4 * i] = 255;
    img.data[4 * i + 3] = 140;
  }
  ctx.putImageData(img, 0, 0);
}

function drawStructure() {
  if (state.structure) structureCanvas.getContext("2d").putImageData(state.structure, 0, 0);
}

// 1-channel-equivalent PNG: opaque black for valid, white for hole.
function maskPng() {
  const c = document.createElement("canvas");
  c.width = state.width;
  c.height = state.height;
  const ctx = c.getContext("2d");
  const img = ctx.createImageData(state.width, state.height);
  for (let i = 0; i < state.mask.length; ++i) {
    const v = state.mask[i] ? 255 : 0;
    img.data[4 * i] = img.data[4 * i + 1] = img.data[4 * i + 2] = v;
    img.data[4 * i + 3] = 255;
  }
  ctx.putImageData(img, 0, 0);
  return canvasBlob(c);
}

function pushUndo() {
  state.undo.push({
    mask: state.mask.slice(),
    structure: state.structure ? new ImageData(new Uint8ClampedArray(state.structure.data), state.width) : null,
    structureDirty: state.structureDirty,
  });
  if (state.undo.length > UNDO_DEPTH) state.undo.shift();
}

async function undo() {
  const prev = state.undo.pop();
  if (!prev) return;
  const maskChanged = prev.mask.some((v, i) => v !== state.mask[i]);
  state.mask = prev.mask;
  state.structure = prev.structure;
  state.structureDirty = prev.structureDirty;
  drawMask();
  drawStructure();
  if (maskChanged) await uploadMask();
}

// Disk of pixels with squared distance below radius^2, so radius 1 is a single pixel.
function stampDisk(cx, cy, value, rgb) {
  const r = state.radius;
  for (let y = Math.max(0, cy - r + 1); y <= Math.min(state.height - 1, cy + r - 1); ++y) {
    for (let x = Math.max(0, cx - r + 1); x <= Math.min(state.width - 1, cx + r - 1); ++x) {
      if ((x - cx) * (x - cx) + (y - cy) * (y - cy) >= r * r) continue;
      const i = y * state.width + x;
      if (rgb) {
        state.structure.data.set([rgb[0], rgb[1], rgb[2], 255], 4 * i);
      } else {
        state.mask[i] = value;
      }
    }
  }
}

function stampLine(a, b, value, rgb) {
  const steps = Math.max(Math.abs(b.x - a.x), Math.abs(b.y - a.y), 1);
  for (let s = 0; s <= steps; ++s) {
    stampDisk(Math.round(a.x + ((b.x - a.x) * s) / steps), Math.round(a.y + ((b.y - a.y) * s) / steps), value, rgb);
  }
}

function hexRgb(hex) {
  const n = parseInt(hex.slice(1), 16);
  return [(n >> 16) & 255, (n >> 8) & 255, n & 255];
}

function attachPainter(canvas, structureTool) {
  let last = null;
  const pos = (e) => {
    const r = canvas.getBoundingClientRect();
    return {
      x: Math.floor(((e.clientX - r.left) / r.width) * state.width),
      y: Math.floor(((e.clientY - r.top) / r.height) * state.height),
    };
  };
  const paint = (p) => {
    if (structureTool) {
      stampLine(last || p, p, 0, hexRgb($("color").value));
      drawStructure();
    } else {
      stampLine(last || p, p, state.tool === "mask-erase" ? 0 : 1);
      drawMask();
    }
    last = p;
  };
  const active = () =>
    state.session && !state.busy &&
    (structureTool ? state.tool === "structure-brush" && state.structure : state.tool !== "structure-brush");
  canvas.addEventListener("pointerdown", (e) => {
    if (!active()) return;
    canvas.setPointerCapture(e.pointerId);
    pushUndo();
    last = null;
    paint(pos(e));
  });
  canvas.addEventListener("pointermove", (e) => {
    if (last && active()) paint(pos(e));
  });
  canvas.addEventListener("pointerup", async () => {
    if (!last) return;
    last = null;
    if (structureTool) {
      state.structureDirty = true;
    } else {
      await uploadMask();
    }
  });
}

async function uploadMask() {
  try {
    await api("PUT", `/api/session/${state.session}/mask`, await maskPng(), "image/png");
  } catch (e) {
    toast("mask upload failed: " + e.message);
  }
}

async function loadImageInto(url, canvas) {
  const blob = await (await api("GET", url)).blob();
  const bmp = await createImageBitmap(blob);
  canvas.width = bmp.width;
  canvas.height = bmp.height;
  const ctx = canvas.getContext("2d");
  ctx.drawImage(bmp, 0, 0);
  return ctx.getImageData(0, 0, bmp.width, bmp.height);
}

async function openFile(file) {
  try {
    if (state.session) api("DELETE", `/api/session/${state.session}`).catch(() => {});
    const form = new FormData();
    form.append("image", file);
    const info = await (await api("POST", "/api/session", form)).json();
    Object.assign(state, {
      session: info.session_id, width: info.width, height: info.height,
      mask: new Uint8Array(info.width * info.height), structure: null, structureDirty: false, undo: [],
    });
    maskCanvas.width = structureCanvas.width = info.width;
    maskCanvas.height = structureCanvas.height = info.height;
    await loadImageInto(`/api/session/${state.session}/result/source`, sourceCanvas);
    structureCanvas.getContext("2d").clearRect(0, 0, info.width, info.height);
    $("flow-img").removeAttribute("src");
    $("result-img").removeAttribute("src");
    $("metrics").textContent = "";
    drawMask();
    setZoom(state.zoom);
    await uploadMask();
    $("run").disabled = false;
  } catch (e) {
    toast("upload failed: " + e.message);
  }
}

async function runInpaint() {
  if (!state.session || state.busy) return;
  state.busy = true;
  $("run").disabled = true;
  try {
    if (state.structureDirty) {
      const c = document.createElement("canvas");
      c.width = state.width;
      c.height = state.height;
      c.getContext("2d").putImageData(state.structure, 0, 0);
      await api("PUT", `/api/session/${state.session}/structure`, await canvasBlob(c), "image/png");
      state.structureDirty = false;
    }
    const out = await (await api("POST", `/api/session/${state.session}/inpaint`, "{}", "application/json")).json();
    const bust = "?t=" + Date.now();
    $("flow-img").src = out.urls.flow_viz + bust;
    $("result-img").src = out.urls.result + bust;
    state.structure = await loadImageInto(out.urls.s_hat + bust, structureCanvas);
    const m = out.metrics;
    const psnr = typeof m.psnr === "number" ? m.psnr.toFixed(2) : m.psnr;
    $("metrics").textContent =
      `hole ${(100 * m.hole_ratio).toFixed(1)}%  PSNR ${psnr} dB  SSIM ${m.ssim.toFixed(4)}  ${m.elapsed_ms.toFixed(0)} ms`;
  } catch (e) {
    toast("inpaint failed: " + e.message);
  } finally {
    state.busy = false;
    $("run").disabled = false;
  }
}

attachPainter(maskCanvas, false);
attachPainter(structureCanvas, true);
$("file").addEventListener("change", (e) => e.target.files[0] && openFile(e.target.files[0]));
$("tool").addEventListener("change", (e) => (state.tool = e.target.value));
$("radius").addEventListener("change", (e) => (state.radius = Math.max(1, parseInt(e.target.value, 10) || 1)));
$("zoom").addEventListener("change", (e) => setZoom(parseInt(e.target.value, 10)));
$("undo").addEventListener("click", undo);
$("clear").addEventListener("click", async () => {
  if (!state.session) return;
  pushUndo();
  state.mask.fill(0);
  drawMask();
  await uploadMask();
});
$("run").addEventListener("click", runInpaint);
for (const box of document.querySelectorAll("[data-layer]")) {
  box.addEventListener("change", () => {
    const layer = box.dataset.layer;
    if (layer === "mask") maskCanvas.classList.toggle("hidden", !box.checked);
    else if (layer === "source") sourceCanvas.classList.toggle("hidden", !box.checked);
    else document.querySelector(`[data-panel="${layer}"]`).style.display = box.checked ? "" : "none";
  });
}
