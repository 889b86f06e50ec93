# seller agent: seller reserve price and seller listing
# ask price: post listing at reserve ask
reserve = 5
