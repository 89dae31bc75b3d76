from .aa import AATrader
from .base import Shout, Trader
from .basic import GVWYTrader, SHVRTrader, ZICTrader, ZIPTrader
from .gdx import GDXTrader
from .zipp import ZIPPTrader

STRATEGIES: dict[str, type[Trader]] = {
    cls.strategy: cls
    for cls in (GVWYTrader, SHVRTrader, ZICTrader, ZIPTrader, AATrader, GDXTrader, ZIPPTrader)
}

__all__ = ["STRATEGIES", "Shout", "Trader", "AATrader", "GDXTrader", "GVWYTrader",
           "SHVRTrader", "ZICTrader", "ZIPTrader", "ZIPPTrader"]
