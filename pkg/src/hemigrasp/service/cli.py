"""Command line entry points: serve, bench run, bench perturb, assets."""

from __future__ import annotations

import argparse
import json
from pathlib import Path


def _cmd_serve(args):
    import uvicorn

    from .app import create_app

    app = create_app(log_dir=args.log_dir)
    if args.assets:
        _preload_assets(app, Path(args.assets))
    uvicorn.run(app, host=args.host, port=args.port, log_level="warning")


def _preload_assets(app, assets: Path):
    """Register every mesh in the assets directory as a scene at startup."""
    from fastapi.testclient import TestClient

    from ..geometry.mesh import load_mesh, save_obj
    import io

    client = TestClient(app)
    for p in sorted(assets.glob("*.obj")) + sorted(assets.glob("*.stl")):
        try:
            mesh = load_mesh(p)
        except Exception as exc:
            print(f"skipping {p.name}: {exc}")
            continue
        buf = io.StringIO()
        for v in mesh.vertices:
            buf.write(f"v {v[0]!r} {v[1]!r} {v[2]!r}\n")
        for f in mesh.faces:
            buf.write(f"f {f[0]+1} {f[1]+1} {f[2]+1}\n")
        r = client.post("/scenes", json={"name": p.stem, "mesh_obj": buf.getvalue()})
        if r.status_code == 200:
            print(f"loaded scene {p.stem}: {r.json()['scene_id']}")
        else:
            print(f"failed to load {p.name}: {r.text}")


def _cmd_bench_run(args):
    from .bench import bench_run

    summary = bench_run(
        objects=args.objects,
        trials_per_object=args.trials,
        policy=args.policy,
        profile=args.mode,
        seed=args.seed,
        out=args.out,
        hand=args.hand,
        workers=args.workers,
    )
    print(json.dumps(summary, indent=2))


def _cmd_bench_perturb(args):
    from .bench import bench_perturb

    sigmas = [float(s) for s in args.sigmas.split(",")]
    summary = bench_perturb(
        object_mesh=args.object,
        sigmas=sigmas,
        trials=args.trials,
        seed=args.seed,
        out=args.out,
        hand=args.hand,
        workers=args.workers,
    )
    print(json.dumps(summary, indent=2))


def _cmd_assets(args):
    """Write the benchmark primitive meshes (and a demo scene) to a directory."""
    from ..geometry.mesh import save_obj
    from ..geometry.primitives import box, cylinder, icosphere

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    objects = {
        "box_cracker": box((0.06, 0.16, 0.21), center=(0, 0, 0.105)),
        "cylinder_can": cylinder(0.034, 0.10, center=(0, 0, 0.05)),
        "cylinder_tall": cylinder(0.04, 0.23, center=(0, 0, 0.115)),
        "sphere_softball": icosphere(0.048, 3, center=(0, 0, 0.048)),
        "sphere_small": icosphere(0.025, 3, center=(0, 0, 0.025)),
    }
    for name, mesh in objects.items():
        save_obj(mesh, out / f"{name}.obj")
        print(f"wrote {out / (name + '.obj')}")


def main(argv=None):
    parser = argparse.ArgumentParser(prog="hemigrasp", description="grasp planning engine")
    sub = parser.add_subparsers(dest="command", required=True)

    p_serve = sub.add_parser("serve", help="run the session service")
    p_serve.add_argument("--port", type=int, default=8765)
    p_serve.add_argument("--host", default="127.0.0.1")
    p_serve.add_argument("--assets", default=None, help="directory of meshes to preload")
    p_serve.add_argument("--log-dir", default=None, help="trial log directory")
    p_serve.set_defaults(func=_cmd_serve)

    p_bench = sub.add_parser("bench", help="headless benchmarks")
    bench_sub = p_bench.add_subparsers(dest="bench_command", required=True)

    p_run = bench_sub.add_parser("run", help="randomized grasping trials")
    p_run.add_argument("--objects", required=True, help="directory of OBJ/STL meshes")
    p_run.add_argument("--trials", type=int, default=10)
    p_run.add_argument("--policy", default="top_down", help="top_down|random_upper|scripted:<file>")
    p_run.add_argument("--mode", default="planned", help="autonomy profile: planned|sc_only|manual")
    p_run.add_argument("--seed", type=int, default=0)
    p_run.add_argument("--out", default="bench_report.csv")
    p_run.add_argument("--hand", default="three_finger")
    p_run.add_argument("--workers", type=int, default=1)
    p_run.set_defaults(func=_cmd_bench_run)

    p_pert = bench_sub.add_parser("perturb", help="reconstruction-error study")
    p_pert.add_argument("--object", required=True, help="mesh file")
    p_pert.add_argument("--sigmas", default="0,0.002,0.005,0.01", help="comma list, meters")
    p_pert.add_argument("--trials", type=int, default=10)
    p_pert.add_argument("--seed", type=int, default=0)
    p_pert.add_argument("--out", default="perturb_report.csv")
    p_pert.add_argument("--hand", default="three_finger")
    p_pert.add_argument("--workers", type=int, default=1)
    p_pert.set_defaults(func=_cmd_bench_perturb)

    p_assets = sub.add_parser("assets", help="write benchmark primitive meshes")
    p_assets.add_argument("--out", required=True)
    p_assets.set_defaults(func=_cmd_assets)

    args = parser.parse_args(argv)
    args.func(args)


if __name__ == "__main__":
    main()
