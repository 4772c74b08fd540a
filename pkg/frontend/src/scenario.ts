/** Scenario document served by GET /scenario, plus the geometry helpers
 * the map view needs (grid decoding, GPS to local ENU).
 */

export interface GeoPoint {
  lat: number;
  lon: number;
  alt: number;
}

export interface GridDoc {
  kind: string;
  origin: [number, number];
  resolution: number;
  width: number;
  height: number;
  cells: string | [number, number][];
}

export interface LandmarkDoc {
  id: string;
  name: string;
  gps: GeoPoint;
}

export interface PedestrianDoc {
  id: string;
  position: number[];
  is_user?: boolean;
}

export interface ScenarioDoc {
  reference_gps: GeoPoint;
  grids: GridDoc[];
  landmarks: LandmarkDoc[];
  pedestrians: PedestrianDoc[];
}

export const EARTH_RADIUS_M = 6371000.0;

/** Equirectangular GPS -> local ENU meters around the scenario reference. */
export function gpsToLocal(ref: GeoPoint, p: GeoPoint): [number, number] {
  const rad = Math.PI / 180;
  const x =
    EARTH_RADIUS_M * (p.lon - ref.lon) * rad * Math.cos(ref.lat * rad);
  const y = EARTH_RADIUS_M * (p.lat - ref.lat) * rad;
  return [x, y];
}

/** Occupancy cells as a flat row-major boolean array.
 *
 * Dense grids arrive base64-packed (8 cells per byte, row-major,
 * most-significant bit first); sparse grids as [row, col] pairs.
 */
export function decodeCells(
  spec: string | [number, number][],
  width: number,
  height: number,
): Uint8Array {
  const out = new Uint8Array(width * height);
  if (typeof spec === "string") {
    const bin = decodeBase64(spec);
    for (let i = 0; i < width * height; i++) {
      const byte = bin[i >> 3];
      if (byte === undefined) break;
      out[i] = (byte >> (7 - (i & 7))) & 1;
    }
  } else {
    for (const [r, c] of spec) out[r * width + c] = 1;
  }
  return out;
}

const B64 =
  "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";

function decodeBase64(s: string): Uint8Array {
  const clean = s.replace(/=+$/, "");
  const out = new Uint8Array(Math.floor((clean.length * 3) / 4));
  let buffer = 0;
  let bits = 0;
  let j = 0;
  for (const ch of clean) {
    const value = B64.indexOf(ch);
    if (value < 0) continue;
    buffer = (buffer << 6) | value;
    bits += 6;
    if (bits >= 8) {
      bits -= 8;
      out[j++] = (buffer >> bits) & 0xff;
    }
  }
  return out;
}
