#!/usr/bin/env python3
"""Regenerates the synthetic tick fixtures. Output is fixed by the seed."""
import datetime as dt
import pathlib
import random

HERE = pathlib.Path(__file__).resolve().parent
STOCKS = [("600001", 800), ("600002", 1500), ("000003", 450)]
DAYS = [dt.date(2021, 3, 1), dt.date(2021, 3, 2)]
TICKS_PER_DAY = 1500


def main() -> None:
    rng = random.Random(20210301)
    rows = []
    for code, start in STOCKS:
        price = start
        for day in DAYS:
            t = dt.datetime.combine(day, dt.time(9, 30))
            for _ in range(TICKS_PER_DAY):
                price = max(100, price + rng.choices([-3, -2, -1, 0, 1, 2, 3], [1, 2, 4, 6, 4, 2, 1])[0])
                volume = rng.randint(1, 50) * 100
                rows.append((code, t.strftime("%Y-%m-%d %H:%M:%S"), f"{price // 100}.{price % 100:02d}", volume))
                t += dt.timedelta(seconds=3)
    with open(HERE / "ticks.csv", "w", newline="\n") as f:
        f.write("code,time,last_price,volume\n")
        for r in rows:
            f.write(",".join(map(str, r)) + "\n")

    with open(HERE / "metadata.csv", "w", newline="\n") as f:
        f.write("stock_code,category,region,scale,life\n")
        f.write("600001,3,1,1200,12\n600002,3,2,5400,20\n000003,7,2,800,5\n")

    with open(HERE / "corrupt_600999.csv", "w", newline="\n") as f:
        f.write("code,time,last_price\n600999,not-a-time,abc\n600999,2021-03-01 09:30:00,-1\n\x00\x01garbage\n")


if __name__ == "__main__":
    main()
