"""Setup script for euclidprefs."""
from setuptools import setup, find_packages
from pathlib import Path

# Read README for long description
readme = Path(__file__).parent / "README.md"
long_description = readme.read_text(encoding="utf-8") if readme.exists() else ""

setup(
    name="euclidprefs",
    version="0.1.0",
    description="Decide whether a strict-order election is 2-Euclidean, with checkable certificates.",
    long_description=long_description,
    long_description_content_type="text/markdown",
    license="CC0-1.0",
    packages=find_packages(exclude=["tests", "tests.*"]),
    python_requires=">=3.9",
    install_requires=[
        "click>=8.0.0",
        "pyyaml>=6.0",
        "regex>=2023.0.0",
        "numpy>=1.22",
        "scipy>=1.9",
        "networkx>=2.8",
        "rich>=12.0",
    ],
    extras_require={
        "dev": ["pytest"],
        "mip": ["mip>=1.15"],
        "all": ["mip>=1.15"],
    },
    entry_points={
        "console_scripts": [
            "euclidprefs=euclidprefs.cli:main",
        ],
    },
    keywords=[
        "social choice", "elections", "preferences", "euclidean preferences",
        "integer programming", "certificates", "preflib",
    ],
    classifiers=[
        "Development Status :: 3 - Alpha",
        "Intended Audience :: Science/Research",
        "License :: CC0 1.0 Universal (CC0 1.0) Public Domain Dedication",
        "Operating System :: OS Independent",
        "Programming Language :: Python :: 3",
        "Programming Language :: Python :: 3.9",
        "Programming Language :: Python :: 3.10",
        "Programming Language :: Python :: 3.11",
        "Programming Language :: Python :: 3.12",
        "Topic :: Scientific/Engineering :: Mathematics",
    ],
)
