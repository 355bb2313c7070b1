"""setuptools wrapper that builds the CMake project and ships scrubperc.

The extension is compiled by the repository's CMake build (tests and CLI
disabled); the classic cmake-ext pattern keeps `pip install -e .` working
without extra build backends.
"""

import os
import subprocess
import sys
from pathlib import Path

from setuptools import setup
from setuptools.command.build_ext import build_ext
from setuptools.extension import Extension


class CMakeExtension(Extension):
    def __init__(self, name):
        super().__init__(name, sources=[])


class CMakeBuild(build_ext):
    def build_extension(self, ext):
        source_dir = Path(__file__).resolve().parent
        ext_path = Path(self.get_ext_fullpath(ext.name)).resolve()
        package_dir = ext_path.parent
        build_dir = Path(self.build_temp).resolve() / "cmake"
        build_dir.mkdir(parents=True, exist_ok=True)

        cfg = "Release"
        cmake_args = [
            f"-DCMAKE_BUILD_TYPE={cfg}",
            "-DSCRUBBER_BUILD_TESTS=OFF",
            "-DSCRUBBER_BUILD_PYTHON=ON",
            f"-DPython3_EXECUTABLE={sys.executable}",
        ]
        subprocess.run(["cmake", str(source_dir), *cmake_args], cwd=build_dir, check=True)
        subprocess.run(
            ["cmake", "--build", ".", "--target", "scrubperc_core", "-j",
             str(os.cpu_count() or 2)],
            cwd=build_dir,
            check=True,
        )

        built = list((build_dir / "python_pkg" / "scrubperc").glob("_core*"))
        if not built:
            raise RuntimeError("CMake did not produce the _core extension")
        package_dir.mkdir(parents=True, exist_ok=True)
        self.copy_file(str(built[0]), str(ext_path))


setup(
    name="scrubperc",
    version="0.1.0",
    description="Floor-scrubber robot perception toolkit (lidar human detection, "
    "multi-sensor tracking, dirt and floor-object detection)",
    packages=["scrubperc"],
    package_dir={"": "python"},
    ext_modules=[CMakeExtension("scrubperc._core")],
    cmdclass={"build_ext": CMakeBuild},
    python_requires=">=3.8",
    install_requires=["numpy"],
)
