"""离散形式与泛函模块"""
