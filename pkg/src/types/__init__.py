# This file makes the types directory a Python package 