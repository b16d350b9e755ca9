// Canvas map: walked trail, deviation highlights, and (outside study
// mode) the route polyline. Everything drawn comes from server frames.

import { fitView, projectLocal, toCanvas, type LatLon, type ViewTransform } from "./geo.js";
import type { RouteDoc } from "./autopilot.js";
import type { StateMsg } from "./protocol.js";

export class MapView {
  private origin: LatLon;
  private routePts: Array<[number, number]>;
  private view: ViewTransform;
  showRoute = false; // study mode hides the route ahead

  constructor(
    private canvas: HTMLCanvasElement,
    private route: RouteDoc,
  ) {
    this.origin = { lat: route.polyline[0][0], lon: route.polyline[0][1] };
    this.routePts = route.polyline.map(([lat, lon]) =>
      projectLocal(this.origin, { lat, lon }),
    );
    this.view = fitView(this.routePts, canvas.width, canvas.height);
  }

  draw(state: StateMsg | null, trail: ReadonlyArray<{ lat: number; lon: number; offRoute: boolean }>): void {
    const ctx = this.canvas.getContext("2d");
    if (!ctx) return;
    ctx.fillStyle = "#10141a";
    ctx.fillRect(0, 0, this.canvas.width, this.canvas.height);

    if (this.showRoute) {
      ctx.strokeStyle = "#3f78c3";
      ctx.lineWidth = 3;
      ctx.beginPath();
      this.routePts.forEach(([x, y], i) => {
        const [cx, cy] = toCanvas(this.view, x, y);
        i === 0 ? ctx.moveTo(cx, cy) : ctx.lineTo(cx, cy);
      });
      ctx.stroke();
      ctx.fillStyle = "#d6a433";
      for (const poi of this.route.pois) {
        const [x, y] = projectLocal(this.origin, { lat: poi.lat, lon: poi.lon });
        const [cx, cy] = toCanvas(this.view, x, y);
        ctx.beginPath();
        ctx.arc(cx, cy, 5, 0, Math.PI * 2);
        ctx.fill();
      }
    }

    // walked trail; deviations highlighted
    for (const p of trail) {
      const [x, y] = projectLocal(this.origin, p);
      const [cx, cy] = toCanvas(this.view, x, y);
      ctx.fillStyle = p.offRoute ? "#e04b3a" : "#7fd47f";
      ctx.fillRect(cx - 1, cy - 1, 2, 2);
    }

    if (state) {
      const [x, y] = projectLocal(this.origin, {
        lat: state.pose.lat,
        lon: state.pose.lon,
      });
      const [cx, cy] = toCanvas(this.view, x, y);
      const h = (state.pose.heading_deg * Math.PI) / 180;
      ctx.strokeStyle = "#ffffff";
      ctx.fillStyle = "#ffffff";
      ctx.beginPath();
      ctx.arc(cx, cy, 6, 0, Math.PI * 2);
      ctx.fill();
      ctx.beginPath();
      ctx.moveTo(cx, cy);
      ctx.lineTo(cx + 14 * Math.sin(h), cy - 14 * Math.cos(h));
      ctx.lineWidth = 2;
      ctx.stroke();
    }
  }
}
