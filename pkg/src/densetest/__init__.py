"""Dense testers over finite field towers."""
