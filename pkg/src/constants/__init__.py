"""结构常数模块"""
