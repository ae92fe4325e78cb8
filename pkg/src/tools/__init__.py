# This file makes the tools directory a Python package 