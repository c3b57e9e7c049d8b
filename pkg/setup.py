"""
Setup script for the nekcm package
"""

from setuptools import setup, find_packages
import re

# Read version from __init__.py
with open("__init__.py", "r") as f:
    version_match = re.search(r"__version__\s*=\s*['\"]([^'\"]*)['\"]", f.read())
    version = version_match.group(1) if version_match else "0.0.1"

# Read requirements from requirements.txt
with open("requirements.txt", "r") as f:
    requirements = [line for line in f.read().splitlines() if line and not line.startswith("pytest")]

# Read README.md for long description
with open("README.md", "r") as f:
    long_description = f.read()

setup(
    name="nekcm",
    version=version,
    description="Calogero-Moser systems, Nekrasov measures, qq-characters and spectral curves",
    long_description=long_description,
    long_description_content_type="text/markdown",
    py_modules=[
        "cmdyn",
        "config",
        "errors",
        "lattice",
        "main",
        "monitoring",
        "nekrasov",
        "partitions",
        "qqchar",
        "qseries",
        "specfun",
        "spectral",
    ],
    packages=find_packages(exclude=["tests", "examples", "examples.*"]),
    include_package_data=True,
    install_requires=requirements,
    extras_require={"test": ["pytest"]},
    classifiers=[
        "Development Status :: 3 - Alpha",
        "Intended Audience :: Science/Research",
        "License :: OSI Approved :: MIT License",
        "Programming Language :: Python :: 3",
        "Programming Language :: Python :: 3.9",
        "Programming Language :: Python :: 3.10",
        "Programming Language :: Python :: 3.11",
        "Topic :: Scientific/Engineering :: Physics",
    ],
    python_requires=">=3.9",
    entry_points={
        "console_scripts": [
            "nekcm=main:main",
        ],
    },
)
