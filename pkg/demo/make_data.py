"""Regenerate the synthetic demo inputs in demo/data/.

Coins trade every day; the market drivers only on weekdays, so the default
``intersect`` alignment drops weekends. Tweet counts exist for every coin
except Tether and have a few empty days, which sends those cells through EM.
"""

from datetime import date
from pathlib import Path

import numpy as np

from cryptobn.data_ingest import TimeSeriesTable
from cryptobn.simulate import MARKET_DRIVERS, synthetic_market

COINS = ("BinanceCoin", "Ethereum", "Litecoin", "Ripple", "Tether")
OUT = Path(__file__).parent / "data"


def main(n_days: int = 420, seed: int = 2021) -> None:
    full = synthetic_market(n_days, COINS, seed=seed, start=date(2019, 1, 1), with_tweets=True)
    rng = np.random.default_rng(seed + 1)
    OUT.mkdir(exist_ok=True)

    prices = full.select(list(COINS))
    (OUT / "coins.csv").write_text(prices.to_csv(), encoding="utf-8")

    weekdays = [i for i, d in enumerate(full.dates) if d.weekday() < 5]
    market = full.select(list(MARKET_DRIVERS)).take(weekdays)
    (OUT / "market.csv").write_text(market.to_csv(), encoding="utf-8")

    tweet_cols = {}
    for coin in COINS[:-1]:
        values = np.array(full[f"{coin}_tweets"])
        values[rng.random(values.size) < 0.01] = np.nan
        tweet_cols[f"{coin}_tweets"] = values
    tweets = TimeSeriesTable(full.dates, tweet_cols)
    (OUT / "tweets.csv").write_text(tweets.to_csv(), encoding="utf-8")


if __name__ == "__main__":
    main()
