"""离散半群与审计模块"""
