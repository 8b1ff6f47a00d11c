"""
HMUA: homogeneity-driven multiscale sparse unmixing of hyperspectral images.
"""

from setuptools import setup, find_packages

from hmua import __version__

setup(
    name="hmua",
    version=__version__,
    description=__doc__,
    packages=find_packages(include=("hmua*", )),
    python_requires=">=3.8",
    install_requires=[
        "joblib",
        "matplotlib",
        "numpy>=1.17",
        "pandas>=1.0",
        "pyyaml",
        "scipy",
    ],
    entry_points={"console_scripts": ["hmua = hmua.main:run_hmua"]},
)
