# bidding strategy helpers: truthful bidding, shade bidding, increment strategy
# shade: scale bid, increment: step bid, truthful: value bid
