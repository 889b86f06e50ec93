# auction runner: run auction rounds until market clears
# each auction round collects bids and asks then clears market
rounds = 3
