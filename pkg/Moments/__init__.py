# Moments package
