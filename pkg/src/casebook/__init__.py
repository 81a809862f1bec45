"""算例复现模块"""
