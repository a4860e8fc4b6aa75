import glob
import os

from pybind11.setup_helpers import Pybind11Extension, build_ext
from setuptools import setup


def eigen_include():
    override = os.environ.get("EIGEN3_INCLUDE_DIR")
    if override:
        return override
    for cand in ("/usr/include/eigen3", "/usr/local/include/eigen3"):
        if os.path.isdir(cand):
            return cand
    raise RuntimeError("Eigen3 headers not found; set EIGEN3_INCLUDE_DIR")


ext = Pybind11Extension(
    "smalldev._core",
    sorted(glob.glob("src/*.cpp")),
    include_dirs=["include", "vendor", eigen_include()],
    cxx_std=20,
    # Keep in lockstep with CMakeLists.txt: the reproducibility guarantees
    # assume every FP operation rounds, so FMA contraction stays off.
    extra_compile_args=["-O2", "-ffp-contract=off"],
)

setup(ext_modules=[ext], cmdclass={"build_ext": build_ext})
