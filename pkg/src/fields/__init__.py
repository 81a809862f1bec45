"""系数场模块"""
