// Thin canvas painter for a Scene. jsdom has no 2D context, so painting is
// skipped when getContext returns null; everything testable lives in the
// scene itself.

import { Scene, SceneMarker } from "./scene.js";

function drawStar(ctx: CanvasRenderingContext2D, m: SceneMarker): void {
  const spikes = 5;
  const outer = m.radius;
  const inner = m.radius / 2.2;
  ctx.beginPath();
  for (let i = 0; i < spikes * 2; i++) {
    const r = i % 2 === 0 ? outer : inner;
    const angle = (i * Math.PI) / spikes - Math.PI / 2;
    const x = m.x + Math.cos(angle) * r;
    const y = m.y + Math.sin(angle) * r;
    if (i === 0) ctx.moveTo(x, y);
    else ctx.lineTo(x, y);
  }
  ctx.closePath();
  ctx.fill();
}

export function paint(scene: Scene, canvas: HTMLCanvasElement): void {
  const ctx = canvas.getContext("2d");
  if (!ctx) return;
  canvas.width = scene.width;
  canvas.height = scene.height;
  ctx.clearRect(0, 0, scene.width, scene.height);
  ctx.fillStyle = "#ffffff";
  ctx.fillRect(0, 0, scene.width, scene.height);

  for (const line of scene.lines) {
    ctx.strokeStyle = line.color;
    ctx.lineWidth = line.dashed ? 2.5 : 2;
    ctx.setLineDash(line.dashed ? [6, 4] : []);
    ctx.beginPath();
    ctx.moveTo(line.x1, line.y1);
    ctx.lineTo(line.x2, line.y2);
    ctx.stroke();
  }
  ctx.setLineDash([]);

  for (const m of scene.markers) {
    ctx.fillStyle = m.color;
    if (m.shape === "star") {
      drawStar(ctx, m);
    } else if (m.shape === "square") {
      ctx.fillRect(m.x - m.radius, m.y - m.radius, m.radius * 2, m.radius * 2);
    } else {
      ctx.beginPath();
      ctx.arc(m.x, m.y, m.radius, 0, Math.PI * 2);
      ctx.fill();
    }
  }
}
