// Orthogonal preview routing, matching the server's elbow convention
// (horizontal first from the start point).

export type Point = [number, number];

export function previewRoute(a: Point, b: Point): number[][] {
  if (a[0] === b[0] && a[1] === b[1]) {
    return [];
  }
  if (a[0] === b[0] || a[1] === b[1]) {
    return [[a[0], a[1], b[0], b[1]]];
  }
  return [
    [a[0], a[1], b[0], a[1]],
    [b[0], a[1], b[0], b[1]],
  ];
}

export function routePolylinePoints(route: number[][]): string {
  if (route.length === 0) {
    return '';
  }
  const points: string[] = [`${route[0]![0]},${route[0]![1]}`];
  for (const segment of route) {
    points.push(`${segment[2]},${segment[3]}`);
  }
  return points.join(' ');
}
