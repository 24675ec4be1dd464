package logs;

public class Guarded {
    void step(State state) {
        if (LOG.isDebugEnabled()) {
            LOG.debug("state " + state);
        }
        if (logger.isTraceEnabled()) logger.trace("step");
        if (state.done()) {
            LOG.info("done");
            state.reset();
        }
        if (LOG.isDebugEnabled()) {
            LOG.debug("a");
        } else {
            fallback();
        }
    }
}
