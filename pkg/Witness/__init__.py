# Witness package
