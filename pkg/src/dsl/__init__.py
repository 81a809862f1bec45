"""系数表达式 DSL 模块"""
