#!/usr/bin/env python
# -*- coding: utf-8 -*-
from setuptools import setup, find_packages

with open("README.md") as f:
    long_description = f.read()

setup(
    name="django-horolab",
    version="0.1.0",
    author="horolab developers",
    description=(
        "Numerical lab for contraction, drift and equidistribution estimates on the "
        "space of unimodular lattices."
    ),
    license="MIT",
    long_description=long_description,
    long_description_content_type="text/markdown",
    platforms=["Any"],
    keywords=["lattices", "homogeneous dynamics", "margulis function", "horocycle"],
    classifiers=[
        "Development Status :: 3 - Alpha",
        "Environment :: Console",
        "Intended Audience :: Science/Research",
        "Natural Language :: English",
        "Operating System :: OS Independent",
        "License :: OSI Approved :: MIT License",
        "Framework :: Django",
        "Framework :: Django :: 4.2",
        "Programming Language :: Python :: 3.11",
        "Topic :: Scientific/Engineering :: Mathematics",
    ],
    install_requires=[
        "Django>=4.2,<5",
        "redis>=4.0",
        "numpy>=1.24",
        "scipy>=1.15",
        "sympy>=1.12",
        "mpmath>=1.3",
        "jsonschema>=4.0",
    ],
    entry_points={"console_scripts": ["horolab=horolab.cli:main"]},
    packages=find_packages(exclude=["tests*"]),
    package_data={"horolab": ["schemas/*.json"]},
    setup_requires=["setuptools>=38.6.0"],
    include_package_data=True,
    zip_safe=False,
)
