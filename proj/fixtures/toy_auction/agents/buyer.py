# buyer agent: buyer valuation and buyer budget drive bidding strategy
# bidding strategy: sample valuation, cap by budget, submit bidding price
valuation = 10
budget = 20
