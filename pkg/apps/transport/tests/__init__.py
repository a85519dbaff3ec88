# Test package for the transport app
