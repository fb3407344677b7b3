import init, { platforms, profile, generate, fly } from "./pkg/quadbench_web.js";

const $ = (id) => document.getElementById(id);
const num = (id) => Number($(id).value);

function show(id, f) {
  try {
    $(id).textContent = f();
  } catch (e) {
    $(id).textContent = `error: ${e.message ?? e}`;
  }
}

function draw(scene, path, outcome) {
  const canvas = $("view");
  const ctx = canvas.getContext("2d");
  const k = Math.min(canvas.width / scene.width, canvas.height / scene.length);
  // World y runs up the canvas.
  const X = (x) => x * k;
  const Y = (y) => canvas.height - y * k;
  ctx.clearRect(0, 0, canvas.width, canvas.height);
  ctx.strokeStyle = "#666";
  ctx.strokeRect(0, canvas.height - scene.length * k, scene.width * k, scene.length * k);

  ctx.fillStyle = "rgba(60, 60, 60, 0.55)";
  for (const o of scene.obstacles) {
    if (o.type === "box") {
      ctx.fillRect(X(o.x0), Y(o.y1), (o.x1 - o.x0) * k, (o.y1 - o.y0) * k);
    } else if (o.type === "cylinder") {
      ctx.lineWidth = Math.max(1, 2 * o.r * k);
      ctx.strokeStyle = "rgba(60, 60, 60, 0.55)";
      ctx.beginPath();
      ctx.moveTo(X(o.x0), Y(o.y0));
      ctx.lineTo(X(o.x1) + 0.01, Y(o.y1));
      ctx.lineCap = "round";
      ctx.stroke();
    } else if (o.type === "voxels") {
      for (const [i, j] of o.columns) {
        ctx.fillRect(X(i * o.size), Y((j + 1) * o.size), o.size * k, o.size * k);
      }
    }
  }
  ctx.lineWidth = 1;

  const dot = (p, colour) => {
    ctx.fillStyle = colour;
    ctx.beginPath();
    ctx.arc(X(p[0]), Y(p[1]), 5, 0, 2 * Math.PI);
    ctx.fill();
  };
  dot(scene.start, "#2a7");
  dot(scene.goal, "#c33");

  if (path && path.length) {
    ctx.strokeStyle = outcome === "Success" ? "#27c" : "#e80";
    ctx.lineWidth = 2;
    ctx.beginPath();
    ctx.moveTo(X(path[0][0]), Y(path[0][1]));
    for (const p of path) ctx.lineTo(X(p[0]), Y(p[1]));
    ctx.stroke();
    ctx.lineWidth = 1;
  }
}

function summary(scene) {
  const v = scene.validation;
  const lines = [
    `${scene.family} (${scene.class}), seed ${scene.seed}, index ${scene.index}`,
    `${scene.width} m x ${scene.length} m, ceiling ${scene.ceiling} m`,
    `${scene.obstacle_count} obstacles`,
    v.solvable ? `solvable, grid path ${v.path_length.toFixed(1)} m` : "UNSOLVABLE",
  ];
  if (scene.fill_fraction !== null) lines.push(`voxel fill ${(100 * scene.fill_fraction).toFixed(2)}%`);
  return lines.join("\n");
}

function sceneArgs() {
  return [$("family").value, BigInt(num("seed")), num("index")];
}

await init();

for (const p of JSON.parse(platforms())) {
  const opt = document.createElement("option");
  opt.value = p.name;
  opt.textContent = `${p.name} (${p.category}, TWR ${p.twr_max})`;
  $("platform").append(opt);
}

$("calc").onclick = () =>
  show("profile-out", () => {
    const p = JSON.parse(
      profile($("layout").value, num("mass"), num("ixx"), num("iyy"), num("izz"), num("ct"), num("cm"), num("arm"), num("omega")),
    );
    return `TWR_max      ${p.twr_max.toFixed(3)}\nalpha_xy_max ${p.alpha_xy_max.toFixed(1)} rad/s^2\nalpha_z_max  ${p.alpha_z_max.toFixed(2)} rad/s^2`;
  });

$("gen").onclick = () =>
  show("scene-out", () => {
    const scene = JSON.parse(generate(...sceneArgs()));
    draw(scene, null, null);
    return summary(scene);
  });

$("fly").onclick = () =>
  show("scene-out", () => {
    const r = JSON.parse(fly(...sceneArgs(), $("platform").value, $("planner").value));
    draw(r.scene, r.path, r.outcome);
    const diag = r.diagnostic ? `\n${r.diagnostic}` : "";
    return `${summary(r.scene)}\n\n${r.outcome} after ${r.elapsed.toFixed(2)} s, min clearance ${r.min_clearance.toFixed(2)} m${diag}`;
  });

$("calc").click();
$("gen").click();
