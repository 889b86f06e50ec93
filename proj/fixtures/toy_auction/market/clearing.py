# market clearing: match buyer bids and seller asks, set clearing price
# clearing rule: highest bid above ask yields trade at mid price
