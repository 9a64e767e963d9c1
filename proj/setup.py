"""Build the pybind11 extension through the project's CMake configuration."""

import os
import shutil
import subprocess
import sys
import sysconfig
from pathlib import Path

from setuptools import Extension, setup
from setuptools.command.build_ext import build_ext


class CMakeExtension(Extension):
    def __init__(self, name):
        super().__init__(name, sources=[])


class CMakeBuild(build_ext):
    def build_extension(self, ext):
        source_dir = Path(__file__).resolve().parent
        build_dir = Path(self.build_temp) / "cmake"
        build_dir.mkdir(parents=True, exist_ok=True)
        cfg = "Debug" if self.debug else "Release"
        subprocess.run(
            [
                "cmake",
                "-S", str(source_dir),
                "-B", str(build_dir),
                f"-DCMAKE_BUILD_TYPE={cfg}",
                f"-DPython3_EXECUTABLE={sys.executable}",
            ],
            check=True,
        )
        jobs = str(os.cpu_count() or 2)
        subprocess.run(
            ["cmake", "--build", str(build_dir), "--target", "gridmarket_py", "-j", jobs],
            check=True,
        )
        suffix = sysconfig.get_config_var("EXT_SUFFIX")
        built = build_dir / f"_gridmarket{suffix}"
        if not built.exists():  # multi-config or copied layouts
            candidates = list(build_dir.rglob(f"_gridmarket{suffix}"))
            if not candidates:
                raise FileNotFoundError(f"_gridmarket{suffix} not produced under {build_dir}")
            built = candidates[0]
        dest = Path(self.get_ext_fullpath(ext.name))
        dest.parent.mkdir(parents=True, exist_ok=True)
        shutil.copy2(built, dest)


setup(
    ext_modules=[CMakeExtension("gridmarket._gridmarket")],
    cmdclass={"build_ext": CMakeBuild},
)
