#!/usr/bin/python
# coding: utf8

from setuptools import setup, find_packages

requirements = ["numpy>=1.17", "scipy>=1.4", "scikit-image>=0.19", "pendulum>=2.0.2"]

test_requirements = ["pytest", "mock"]

with open("README.md") as readme_file:
    readme = readme_file.read()

VERSION = "0.1"

config = {
    "description": "AM-FM image decomposition and classifier explanations",
    "author": "glassbox developers",
    "long_description": readme,
    "long_description_content_type": "text/markdown",
    "url": "",
    "version": VERSION,
    "install_requires": requirements,
    "tests_require": test_requirements,
    "packages": find_packages(exclude=["tests"]),
    "entry_points": {"console_scripts": ["glassbox=glassbox.cli:main"]},
    "name": "glassbox",
}

setup(**config)
