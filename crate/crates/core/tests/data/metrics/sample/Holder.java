package sample;

public class Holder {
    int a, b = 2, c;
    protected static final String NAME = "holder";
    public volatile boolean ready;
    private transient Object cache;

    public Holder() {
    }

    public void reset() {
        a = b = c = 0;
        cache = null;
    }
}
